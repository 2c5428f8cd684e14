#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rpe/game.hpp"
#include "rpe/network.hpp"
#include "rpe/simplex.hpp"

namespace rpe {

/// Strictly decreasing positive eps_n with their indices n.
struct EpsSchedule {
  std::vector<std::size_t> n;
  std::vector<double> eps;

  /// eps_n = 1 / (6 n) for n = n0..n1.
  static EpsSchedule sixth(std::size_t n0, std::size_t n1);
  static EpsSchedule from_values(std::vector<double> eps);

  std::size_t size() const noexcept { return eps.size(); }
  /// Throws PreconditionError unless positive and strictly decreasing; with
  /// a floor bound, also requires eps_1 < bound.
  void validate(std::optional<double> floor_bound = std::nullopt) const;
};

struct BeckmannOptions {
  double tol = 1e-12;  // projected-gradient stationarity, inf-norm
  std::size_t max_iters = 200000;
  std::optional<std::vector<double>> start;
};

struct BeckmannResult {
  ActionDistribution flow;
  double objective = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  std::vector<double> objective_history;
};

/// Minimizes the perturbed Beckmann objective over {tau : tau_p >= eps}.
/// eps = 0 gives the unperturbed (Wardrop) program. Throws SolverError when
/// the stationarity residual is not met within max_iters.
BeckmannResult solve_beckmann(const CongestionNetwork& net, double eps,
                              const BeckmannOptions& opts = {});

struct KktReport {
  enum class Verdict { Pass, Fail, Malformed };
  Verdict verdict = Verdict::Fail;
  double lambda = 0.0;
  std::vector<double> mu;
  std::vector<double> stationarity;     // |mu_p| on paths above the floor
  std::vector<double> complementarity;  // max(0, -mu_p) everywhere
  double max_residual = 0.0;
  double tol = 0.0;
  std::string message;
};

const char* to_string(KktReport::Verdict v);

KktReport verify_kkt(const CongestionNetwork& net, double eps, const ActionDistribution& flow,
                     double tol);

struct TrajectoryPoint {
  std::size_t n = 0;
  double eps = 0.0;
  std::vector<double> coords;
  double objective = 0.0;
  double kkt_residual = 0.0;
};

struct RpeLimitOptions {
  BeckmannOptions beckmann;
  double kkt_tol = 1e-9;
  std::size_t extrapolation_nodes = 6;
};

struct RpeLimitResult {
  ActionDistribution limit;           // estimated eps -> 0 limit
  ActionDistribution final_iterate;   // solution at the last eps
  std::string limit_method;           // "extrapolated" or "final-iterate"
  std::vector<TrajectoryPoint> trajectory;
  std::vector<double> cauchy;         // ||tau^n - tau^{n-1}||_inf
  double cauchy_residual = 0.0;       // last entry of `cauchy`
  bool strictly_increasing = false;   // all used costs pass the strict-slope test
  bool unique_limit = false;          // strict increase and a Cauchy tail
};

RpeLimitResult rpe_limit(const CongestionNetwork& net, const EpsSchedule& schedule,
                         const RpeLimitOptions& opts = {});

/// Polynomial extrapolation to eps = 0 through (eps_i, value_i) by Neville's
/// scheme.
double extrapolate_to_zero(const std::vector<double>& eps, const std::vector<double>& values);

struct FixedPointOptions {
  double alpha = 0.3;
  double tol = 1e-10;
  std::size_t max_iters = 20000;
  double tie_tol = 1e-9;
  std::size_t snap_every = 20;
  McConfig mc;
  std::optional<RandomizedProfile> start;  // initial best-response mixtures
};

struct FixedPointResult {
  RandomizedProfile h;      // (1 - eps) mu_t + eps nu
  RandomizedProfile mu;     // best-response mixtures
  ActionDistribution summary;
  double residual = 0.0;    // max type regret of mu under phi(summary)
  std::size_t iterations = 0;
  std::vector<double> history;
};

/// Fixed point of the D/B map: h_t = (1 - eps) mu_t + eps nu with mu_t a
/// mixture over the best responses of type t at phi_t(s(h)).
FixedPointResult fixed_point_eps_rpe(const LargeGame& game, double eps,
                                     const TemplateFamily& family,
                                     const FixedPointOptions& opts = {});
FixedPointResult fixed_point_eps_rpe(const PerturbedEvaluator& ev, double eps,
                                     const TemplateFamily& family,
                                     const FixedPointOptions& opts = {});

struct GameTrajectoryPoint {
  std::size_t n = 0;
  double eps = 0.0;
  RandomizedProfile h;
  RandomizedProfile mu;
  ActionDistribution summary;
  double residual = 0.0;
};

struct GameLimitOptions {
  FixedPointOptions fixed_point;
  double cauchy_tol = 1e-3;
  std::size_t extrapolation_nodes = 6;
};

struct GameLimitResult {
  RandomizedProfile limit;
  ActionDistribution limit_summary;
  std::string limit_method;
  std::vector<GameTrajectoryPoint> trajectory;
  double profile_cauchy = 0.0;   // sup over the last tenth of the schedule
  double summary_cauchy = 0.0;
  bool profiles_converge = false;   // per-type limits exist numerically
  bool summaries_converge = false;  // summary limit exists numerically
  bool converged = false;
};

GameLimitResult rpe_limit_game(const LargeGame& game, const EpsSchedule& schedule,
                               const TemplateFamily& family, const GameLimitOptions& opts = {});

struct PoaOptions {
  EpsSchedule schedule = EpsSchedule::sixth(1, 200);
  std::size_t random_starts = 8;
  std::uint64_t seed = 1;
};

struct PoaResult {
  double equilibrium_cost = 0.0;
  double optimum_cost = 0.0;
  double ratio = 0.0;
  ActionDistribution equilibrium_flow;
  ActionDistribution optimum_flow;
  bool convex = true;  // x C_e(x) convex on every used edge (numerical test)
  std::string method;
};

PoaResult price_of_anarchy(const CongestionNetwork& net, const PoaOptions& opts = {});

}  // namespace rpe
