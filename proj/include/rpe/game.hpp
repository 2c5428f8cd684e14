#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rpe/expr.hpp"
#include "rpe/simplex.hpp"

namespace rpe {

inline constexpr std::size_t kDefaultMcSamples = 200000;
inline constexpr std::uint64_t kDefaultMcSeed = 20240611;
inline constexpr double kDefaultTieTol = 1e-6;

/// Monte Carlo settings for eta-integrals that have no exact reduction.
struct McConfig {
  std::size_t samples = kDefaultMcSamples;
  std::uint64_t seed = kDefaultMcSeed;
};

struct PayoffType {
  std::string id;
  double mass = 0.0;
  std::vector<Expr> payoff;  // one expression per action, over tau
};

/// A large game with finitely many payoff types. Players of a type share one
/// payoff function u(a, tau); the type's mass is its share of the continuum.
class LargeGame {
 public:
  LargeGame(std::vector<std::string> actions, std::vector<PayoffType> types);

  std::size_t num_actions() const noexcept { return actions_.size(); }
  std::size_t num_types() const noexcept { return types_.size(); }
  const std::vector<std::string>& actions() const noexcept { return actions_; }
  const std::vector<PayoffType>& types() const noexcept { return types_; }
  const PayoffType& type(std::size_t t) const { return types_.at(t); }

  /// Throws LookupError for unknown names.
  std::size_t action_index(std::string_view name) const;
  std::size_t type_index(std::string_view id) const;

  double payoff(std::size_t t, std::size_t a, std::span<const double> tau) const {
    return types_[t].payoff[a].eval(tau);
  }

  /// Source form of u_t(a, .) in the game-file grammar.
  std::string payoff_string(std::size_t t, std::size_t a) const;

 private:
  std::vector<std::string> actions_;
  std::vector<PayoffType> types_;
};

/// Per-type strategy h(t), aligned with LargeGame::types().
struct RandomizedProfile {
  std::vector<ActionDistribution> h;

  static RandomizedProfile symmetric(const LargeGame& game, const ActionDistribution& d);

  double min_weight() const;
  bool full_support() const { return min_weight() > 0.0; }
};

/// (1 - eps) delta_tau + sum_j w_j delta_{v_j} + w_u eta.
struct PerturbationMeasure {
  ActionDistribution base;
  double base_weight = 1.0;
  std::vector<std::pair<ActionDistribution, double>> atoms;
  double uniform_weight = 0.0;
  double epsilon = 0.0;

  /// Throws PreconditionError when weights are negative or do not sum to 1.
  void validate() const;
  bool full_support() const { return uniform_weight > 0.0; }

  static PerturbationMeasure dirac(const ActionDistribution& tau);
};

/// A perturbation rule tau -> phi^eps(tau). Each component gets weight
/// linear * eps + quadratic * eps^2 and is either a fixed atom or eta
/// (point == nullopt). Linear coefficients sum to 1 and quadratic ones to 0,
/// so the base keeps exactly 1 - eps.
struct PerturbationTemplate {
  struct Component {
    std::optional<ActionDistribution> point;
    double linear = 0.0;
    double quadratic = 0.0;
  };
  std::vector<Component> components;

  /// (1 - eps) delta_tau + eps eta.
  static PerturbationTemplate standard();
  /// (1 - eps) delta_tau + sum_v w_v eps delta_v + w_u eps eta over vertices v.
  static PerturbationTemplate vertex_mix(std::size_t K, std::span<const double> vertex_weights,
                                         double uniform_weight);

  void validate(std::size_t K) const;
  bool full_support() const;
  PerturbationMeasure apply(const ActionDistribution& tau, double eps) const;
};

/// One template shared by all types, or one per type.
struct TemplateFamily {
  std::vector<PerturbationTemplate> per_type;

  static TemplateFamily shared(PerturbationTemplate t) { return {{std::move(t)}}; }
  const PerturbationTemplate& for_type(std::size_t t) const {
    return per_type.size() == 1 ? per_type.front() : per_type.at(t);
  }
  void validate(const LargeGame& game) const;
};

/// Expected payoffs under perturbed summaries. The eta-integral of each
/// u_t(a, .) is computed once: exactly (Beta quadrature) for every additive
/// term that depends on one coordinate sum, by seeded Monte Carlo otherwise.
class PerturbedEvaluator {
 public:
  explicit PerturbedEvaluator(const LargeGame& game, McConfig mc = {});

  const LargeGame& game() const noexcept { return *game_; }
  double eta_integral(std::size_t t, std::size_t a) const {
    return eta_[t * game_->num_actions() + a];
  }
  /// True when every eta-integral was computed without sampling.
  bool exact() const noexcept { return exact_; }
  const McConfig& mc() const noexcept { return mc_; }

  double expected(std::size_t t, std::size_t a, const PerturbationMeasure& m) const;
  std::vector<double> expected_all(std::size_t t, const PerturbationMeasure& m) const;

 private:
  const LargeGame* game_;
  McConfig mc_;
  std::vector<double> eta_;
  bool exact_ = true;
};

/// Exact-or-MC integral of e over eta on the K-simplex. `used_mc` reports
/// whether sampling was needed.
double eta_expectation(const Expr& e, std::size_t K, const McConfig& mc,
                       bool* used_mc = nullptr);

double eval_payoff(const LargeGame& game, std::string_view type_id,
                   std::string_view action, const ActionDistribution& tau);

ActionDistribution societal_summary(const LargeGame& game, const RandomizedProfile& h);

double expected_payoff(const LargeGame& game, std::string_view type_id,
                       std::string_view action, const PerturbationMeasure& m,
                       const McConfig& mc = {});

/// Indices of actions within tol of the best expected payoff.
std::vector<std::size_t> best_responses(const PerturbedEvaluator& ev, std::size_t t,
                                        const PerturbationMeasure& m,
                                        double tol = kDefaultTieTol);
std::vector<std::string> best_responses(const LargeGame& game, std::string_view type_id,
                                        const PerturbationMeasure& m,
                                        double tol = kDefaultTieTol,
                                        const McConfig& mc = {});

// --- file formats ----------------------------------------------------------

struct GameFile {
  LargeGame game;
  std::map<std::string, RandomizedProfile> named_profiles;
};

/// Parses the JSON game format. Piecewise payoffs are checked for continuity
/// at every breakpoint; a jump raises ModelError.
GameFile parse_game(std::string_view json_text, const std::string& context = {});
GameFile load_game(const std::string& path);
std::string game_to_json(const LargeGame& game);

/// Resolves a profile argument: a name from `file.named_profiles`, a JSON
/// profile file path, "w1,w2,..." applied to every type, or
/// "type=w1,w2,...;type=..." (fractions such as 5/6 are accepted).
RandomizedProfile resolve_profile(const GameFile& file, const std::string& arg);
RandomizedProfile parse_profile_json(const LargeGame& game, std::string_view json_text,
                                     const std::string& context = {});

/// Reads a whole file; throws ParseError when it cannot be opened.
std::string read_text_file(const std::string& path);

/// Parses "p", "p/q", or a decimal.
double parse_fraction(std::string_view text);

}  // namespace rpe
