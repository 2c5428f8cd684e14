#include "rpe/lp.hpp"

#include <cmath>
#include <limits>

#include "rpe/errors.hpp"

namespace rpe {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr std::size_t kDegenerateRun = 50;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), t_((rows + 1) * (cols + 1), 0.0) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * (cols_ + 1) + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  // Row `rows_` is the reduced-cost row of a maximization: entry j holds
  // -(c_j - z_j), so a negative entry marks an improving column.
  double& obj(std::size_t c) { return at(rows_, c); }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j <= cols_; ++j) at(r, j) /= p;
    for (std::size_t i = 0; i <= rows_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= cols_; ++j) at(i, j) -= f * at(r, j);
      at(i, c) = 0.0;
    }
  }

  void drop_row(std::size_t r) {
    const std::size_t w = cols_ + 1;
    t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(r * w),
             t_.begin() + static_cast<std::ptrdiff_t>((r + 1) * w));
    --rows_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> t_;
};

enum class Outcome { Optimal, Unbounded, Limit };

Outcome run_simplex(Tableau& T, std::vector<std::size_t>& basis, std::size_t allowed_cols,
                    std::size_t max_pivots, std::size_t& pivots) {
  std::size_t degenerate = 0;
  while (pivots < max_pivots) {
    const bool bland = degenerate >= kDegenerateRun;
    std::size_t enter = allowed_cols;
    double best = -kPivotTol;
    for (std::size_t j = 0; j < allowed_cols; ++j) {
      const double d = T.obj(j);
      if (d < best) {
        enter = j;
        if (bland) break;
        best = d;
      }
    }
    if (enter == allowed_cols) return Outcome::Optimal;
    std::size_t leave = T.rows();
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < T.rows(); ++i) {
      const double a = T.at(i, enter);
      if (a <= kPivotTol) continue;
      const double r = T.rhs(i) / a;
      if (r < ratio - 1e-14 ||
          (std::abs(r - ratio) <= 1e-14 && leave < T.rows() && basis[i] < basis[leave])) {
        ratio = r;
        leave = i;
      }
    }
    if (leave == T.rows()) return Outcome::Unbounded;
    degenerate = ratio <= 1e-14 ? degenerate + 1 : 0;
    T.pivot(leave, enter);
    basis[leave] = enter;
    ++pivots;
  }
  return Outcome::Limit;
}

}  // namespace

const char* to_string(LpResult::Status s) {
  switch (s) {
    case LpResult::Status::Optimal:
      return "optimal";
    case LpResult::Status::Infeasible:
      return "infeasible";
    case LpResult::Status::Unbounded:
      return "unbounded";
    case LpResult::Status::IterationLimit:
      return "iteration limit";
  }
  return "?";
}

LpResult solve_lp(const LinearProgram& lp, std::size_t max_pivots) {
  const std::size_t n = lp.c.size();
  const std::size_t mu = lp.A_ub.size();
  const std::size_t me = lp.A_eq.size();
  if (lp.b_ub.size() != mu || lp.b_eq.size() != me) {
    throw PreconditionError("LP right-hand side size mismatch");
  }
  for (const auto& row : lp.A_ub) {
    if (row.size() != n) throw PreconditionError("LP row size mismatch");
  }
  for (const auto& row : lp.A_eq) {
    if (row.size() != n) throw PreconditionError("LP row size mismatch");
  }

  std::size_t n_art = me;
  for (double b : lp.b_ub) n_art += b < 0.0 ? 1 : 0;
  const std::size_t slack0 = n;
  const std::size_t art0 = n + mu;
  const std::size_t m = mu + me;
  Tableau T(m, n + mu + n_art);
  std::vector<std::size_t> basis(m);

  std::size_t art = art0;
  std::vector<bool> has_art(m, false);
  for (std::size_t i = 0; i < mu; ++i) {
    const double sign = lp.b_ub[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) T.at(i, j) = sign * lp.A_ub[i][j];
    T.at(i, slack0 + i) = sign;
    T.rhs(i) = sign * lp.b_ub[i];
    if (sign > 0) {
      basis[i] = slack0 + i;
    } else {
      T.at(i, art) = 1.0;
      basis[i] = art++;
      has_art[i] = true;
    }
  }
  for (std::size_t k = 0; k < me; ++k) {
    const std::size_t i = mu + k;
    const double sign = lp.b_eq[k] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) T.at(i, j) = sign * lp.A_eq[k][j];
    T.rhs(i) = sign * lp.b_eq[k];
    T.at(i, art) = 1.0;
    basis[i] = art++;
    has_art[i] = true;
  }

  LpResult result;
  // Phase 1: maximize -sum(artificials).
  if (n_art > 0) {
    for (std::size_t j = art0; j < T.cols(); ++j) T.obj(j) = 1.0;
    T.rhs(m) = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!has_art[i]) continue;
      for (std::size_t j = 0; j <= T.cols(); ++j) T.at(m, j) -= T.at(i, j);
    }
    const Outcome o = run_simplex(T, basis, T.cols(), max_pivots, result.pivots);
    if (o == Outcome::Limit) {
      result.status = LpResult::Status::IterationLimit;
      return result;
    }
    if (T.rhs(T.rows()) < -1e-9) {
      result.status = LpResult::Status::Infeasible;
      return result;
    }
    // Drive zero-level artificials out of the basis, dropping redundant rows.
    for (std::size_t i = 0; i < T.rows();) {
      if (basis[i] < art0) {
        ++i;
        continue;
      }
      std::size_t col = art0;
      for (std::size_t j = 0; j < art0; ++j) {
        if (std::abs(T.at(i, j)) > kPivotTol) {
          col = j;
          break;
        }
      }
      if (col == art0) {
        T.drop_row(i);
        basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(i));
        continue;
      }
      T.pivot(i, col);
      basis[i] = col;
      ++i;
    }
  }

  // Phase 2 over the non-artificial columns.
  const std::size_t rows = T.rows();
  for (std::size_t j = 0; j <= T.cols(); ++j) T.at(rows, j) = 0.0;
  for (std::size_t j = 0; j < n; ++j) T.obj(j) = -lp.c[j];
  for (std::size_t i = 0; i < rows; ++i) {
    const std::size_t b = basis[i];
    const double cb = b < n ? lp.c[b] : 0.0;
    if (cb == 0.0) continue;
    for (std::size_t j = 0; j <= T.cols(); ++j) T.at(rows, j) += cb * T.at(i, j);
  }
  const Outcome o = run_simplex(T, basis, art0, max_pivots, result.pivots);
  if (o == Outcome::Limit) {
    result.status = LpResult::Status::IterationLimit;
    return result;
  }
  if (o == Outcome::Unbounded) {
    result.status = LpResult::Status::Unbounded;
    return result;
  }
  result.status = LpResult::Status::Optimal;
  result.x.assign(n, 0.0);
  for (std::size_t i = 0; i < rows; ++i) {
    if (basis[i] < n) result.x[basis[i]] = T.rhs(i);
  }
  result.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) result.objective += lp.c[j] * result.x[j];
  return result;
}

}  // namespace rpe
