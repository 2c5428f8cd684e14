#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rpe/game.hpp"
#include "rpe/solvers.hpp"

namespace rpe {

inline constexpr std::size_t kDefaultDominanceGrid = 50;
inline constexpr double kDefaultDominanceTol = 1e-7;
inline constexpr double kDefaultCheckTol = 1e-7;

/// Evidence attached to a verdict. Fields that do not apply stay empty.
struct Witness {
  std::string type;
  std::string action;
  std::string other;             // competing or dominating action
  std::vector<double> point;     // a summary tau or perturbed summary
  std::vector<double> mixture;   // dominating mixture or family parameters
  double value = 0.0;            // margin at the witness
  std::string note;
};

struct CheckReport {
  enum class Verdict { Pass, Fail, Inconclusive };

  std::string check;
  Verdict verdict = Verdict::Inconclusive;
  std::string message;
  std::vector<Witness> witnesses;
  std::vector<std::pair<std::string, double>> margins;
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::string> notes;
  std::vector<CheckReport> parts;

  bool passed() const { return verdict == Verdict::Pass; }
  void margin(std::string key, double v) { margins.emplace_back(std::move(key), v); }
  void echo(std::string key, std::string v) { config.emplace_back(std::move(key), std::move(v)); }
  void echo(std::string key, double v);
  /// First margin with this key, if any.
  std::optional<double> find_margin(const std::string& key) const;
};

const char* to_string(CheckReport::Verdict v);

/// JSON text with verdict, witnesses, margins, notes, and the config echo.
std::string report_to_json(const CheckReport& r, int indent = 2);

CheckReport check_nash(const LargeGame& game, const RandomizedProfile& h, double tol);

struct AdmissibleOptions {
  std::size_t grid = kDefaultDominanceGrid;
  double tol = kDefaultDominanceTol;
  bool breakpoints = true;  // add summaries on payoff breakpoints to the grid
};

/// Grid-based weak-dominance test for every supported action.
CheckReport check_admissible(const LargeGame& game, const RandomizedProfile& h,
                             const AdmissibleOptions& opts = {});

/// Summaries used by check_admissible: simplex_grid(K, m) plus, when asked,
/// grid points on every face where a payoff switches branch.
std::vector<ActionDistribution> dominance_grid(const LargeGame& game, std::size_t m,
                                               bool breakpoints);

struct EpsRpeOptions {
  double rational_mass = 1.0;
  double tol = kDefaultCheckTol;
  McConfig mc;
};

/// Conditions of an eps-robust perfect equilibrium at one eps. Throws
/// PreconditionError when the family is not full support or the rational
/// mass lies outside (1 - eps, 1].
CheckReport check_eps_rpe(const LargeGame& game, const RandomizedProfile& h, double eps,
                          const TemplateFamily& family, const EpsRpeOptions& opts = {});
CheckReport check_eps_rpe(const PerturbedEvaluator& ev, const RandomizedProfile& h, double eps,
                          const TemplateFamily& family, const EpsRpeOptions& opts = {});

struct CertificateOptions {
  EpsSchedule schedule = EpsSchedule::sixth(1, 20);
  double tol = kDefaultCheckTol;
  McConfig mc;
};

/// Checks that every supported action of h is a best response at
/// phi^{eps_n}(s(h)) for each eps_n in the schedule.
CheckReport check_aggregate_robustness_certificate(const LargeGame& game,
                                                   const RandomizedProfile& h,
                                                   const TemplateFamily& family,
                                                   const CertificateOptions& opts = {});
CheckReport check_aggregate_robustness_certificate(const PerturbedEvaluator& ev,
                                                   const RandomizedProfile& h,
                                                   const TemplateFamily& family,
                                                   const CertificateOptions& opts = {});

struct SearchOptions {
  std::size_t resolution = 4;  // vertex and uniform weights are multiples of 1/resolution
  CertificateOptions certificate;
};

/// Searches shared vertex_mix families whose weights are multiples of
/// 1/resolution with a positive uniform part. Passes with the first family
/// that certifies h; otherwise fails within the search, never claiming that
/// no certificate exists.
CheckReport search_perturbation_certificate(const LargeGame& game, const RandomizedProfile& h,
                                            const SearchOptions& opts = {});

struct TieProbeResult {
  std::size_t trials = 0;
  std::size_t hits = 0;  // measures where a and b tie and both are >= the bound
  double closest_gap = 0.0;
  std::vector<double> closest_base;
};

/// Samples random full-support perturbation measures and counts those under
/// which the expected payoffs of actions a and b agree within tol while both
/// are at least `floor_value`.
TieProbeResult probe_joint_best_response(const PerturbedEvaluator& ev, std::size_t type,
                                         std::size_t a, std::size_t b, double floor_value,
                                         std::size_t trials, std::uint64_t seed,
                                         double tol = 1e-9);

/// Identity u_t(a, .) - u_t(b, .) = P(a, .) - P(b, .) on simplex_grid(K, m).
CheckReport check_potential(const LargeGame& game, const std::vector<Expr>& potential,
                            std::size_t m, double tol);

struct PotentialSearch {
  std::optional<std::vector<Expr>> potential;
  CheckReport report;
};

/// Candidate P(a_k, .) = u_0(a_k, .) - u_0(a_1, .) from the first type,
/// kept only when check_potential accepts it for every type.
PotentialSearch find_potential(const LargeGame& game, std::size_t m, double tol);

/// Explicit perturbation for an admissible Nash equilibrium of a two-action,
/// single-type game, and the eps-profile it supports.
struct TwoPathConstruction {
  std::string kind;  // "tie", "interior", or "boundary"
  TemplateFamily family;
  RandomizedProfile h_eps;
  double rho = 0.0;  // boundary case: payoff advantage of the used action under zeta
};

TwoPathConstruction two_path_construction(const PerturbedEvaluator& ev,
                                          const RandomizedProfile& h, double eps);

}  // namespace rpe
