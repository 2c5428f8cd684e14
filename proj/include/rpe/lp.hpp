#pragma once

#include <cstddef>
#include <vector>

namespace rpe {

/// Small dense linear program
///   maximize c.x  subject to  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0.
struct LinearProgram {
  std::vector<double> c;
  std::vector<std::vector<double>> A_ub;
  std::vector<double> b_ub;
  std::vector<std::vector<double>> A_eq;
  std::vector<double> b_eq;
};

struct LpResult {
  enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };
  Status status = Status::IterationLimit;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t pivots = 0;
};

/// Two-phase tableau simplex. Dantzig pricing, switching to Bland's rule after
/// a run of degenerate pivots so the method cannot cycle.
LpResult solve_lp(const LinearProgram& lp, std::size_t max_pivots = 50000);

const char* to_string(LpResult::Status s);

}  // namespace rpe
