#include "rpe/game.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rpe/errors.hpp"

namespace rpe {

using nlohmann::json;

LargeGame::LargeGame(std::vector<std::string> actions, std::vector<PayoffType> types)
    : actions_(std::move(actions)), types_(std::move(types)) {
  if (actions_.size() < 2) throw ModelError("a game needs at least two actions");
  std::set<std::string> seen(actions_.begin(), actions_.end());
  if (seen.size() != actions_.size()) throw ModelError("duplicate action name");
  if (types_.empty()) throw ModelError("a game needs at least one type");
  std::set<std::string> ids;
  double total = 0.0;
  for (const PayoffType& t : types_) {
    if (!ids.insert(t.id).second) throw ModelError("duplicate type id '" + t.id + "'");
    if (!(t.mass > 0.0 && t.mass <= 1.0)) {
      throw ModelError("type '" + t.id + "' mass must lie in (0, 1]");
    }
    if (t.payoff.size() != actions_.size()) {
      throw ModelError("type '" + t.id + "' must give one payoff per action");
    }
    for (const Expr& e : t.payoff) {
      for (std::size_t v : e.variables()) {
        if (v >= actions_.size()) throw ModelError("payoff references unknown coordinate");
      }
    }
    total += t.mass;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ModelError("type masses must sum to 1");
}

std::size_t LargeGame::action_index(std::string_view name) const {
  for (std::size_t k = 0; k < actions_.size(); ++k) {
    if (actions_[k] == name) return k;
  }
  throw LookupError("unknown action '" + std::string(name) + "'");
}

std::size_t LargeGame::type_index(std::string_view id) const {
  for (std::size_t t = 0; t < types_.size(); ++t) {
    if (types_[t].id == id) return t;
  }
  throw LookupError("unknown type '" + std::string(id) + "'");
}

std::string LargeGame::payoff_string(std::size_t t, std::size_t a) const {
  return types_.at(t).payoff.at(a).to_string(
      [this](std::size_t k) { return "tau(" + actions_[k] + ")"; });
}

RandomizedProfile RandomizedProfile::symmetric(const LargeGame& game,
                                               const ActionDistribution& d) {
  if (d.size() != game.num_actions()) {
    throw PreconditionError("profile dimension does not match the action count");
  }
  return {std::vector<ActionDistribution>(game.num_types(), d)};
}

double RandomizedProfile::min_weight() const {
  double m = 1.0;
  for (const auto& d : h) m = std::min(m, d.min_weight());
  return m;
}

// ---------------------------------------------------------------------------

void PerturbationMeasure::validate() const {
  double total = base_weight + uniform_weight;
  if (base_weight < 0.0 || uniform_weight < 0.0) {
    throw PreconditionError("perturbation weights must be nonnegative");
  }
  for (const auto& [v, w] : atoms) {
    if (w < 0.0) throw PreconditionError("perturbation weights must be nonnegative");
    if (v.size() != base.size()) throw PreconditionError("atom dimension mismatch");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw PreconditionError("perturbation weights must sum to 1");
  }
}

PerturbationMeasure PerturbationMeasure::dirac(const ActionDistribution& tau) {
  PerturbationMeasure m;
  m.base = tau;
  return m;
}

PerturbationTemplate PerturbationTemplate::standard() {
  PerturbationTemplate t;
  t.components.push_back({std::nullopt, 1.0, 0.0});
  return t;
}

PerturbationTemplate PerturbationTemplate::vertex_mix(std::size_t K,
                                                      std::span<const double> vertex_weights,
                                                      double uniform_weight) {
  if (vertex_weights.size() != K) throw PreconditionError("need one weight per vertex");
  PerturbationTemplate t;
  for (std::size_t k = 0; k < K; ++k) {
    if (vertex_weights[k] != 0.0) {
      t.components.push_back({ActionDistribution::vertex(K, k), vertex_weights[k], 0.0});
    }
  }
  if (uniform_weight != 0.0) t.components.push_back({std::nullopt, uniform_weight, 0.0});
  return t;
}

void PerturbationTemplate::validate(std::size_t K) const {
  double lin = 0.0;
  double quad = 0.0;
  for (const Component& c : components) {
    if (c.point && c.point->size() != K) {
      throw PreconditionError("perturbation atom dimension mismatch");
    }
    if (c.linear < 0.0) throw PreconditionError("perturbation weights must be nonnegative");
    lin += c.linear;
    quad += c.quadratic;
  }
  if (std::abs(lin - 1.0) > 1e-12 || std::abs(quad) > 1e-12) {
    throw PreconditionError(
        "perturbation template must give the non-base part total weight eps");
  }
}

bool PerturbationTemplate::full_support() const {
  return std::any_of(components.begin(), components.end(), [](const Component& c) {
    return !c.point && (c.linear > 0.0 || c.quadratic > 0.0);
  });
}

PerturbationMeasure PerturbationTemplate::apply(const ActionDistribution& tau,
                                                double eps) const {
  if (!(eps >= 0.0 && eps < 1.0)) throw PreconditionError("epsilon must lie in [0, 1)");
  PerturbationMeasure m;
  m.base = tau;
  m.base_weight = 1.0 - eps;
  m.epsilon = eps;
  for (const Component& c : components) {
    const double w = c.linear * eps + c.quadratic * eps * eps;
    if (w < -1e-15) {
      throw PreconditionError("perturbation template gives a negative weight at this eps");
    }
    if (c.point) {
      m.atoms.emplace_back(*c.point, std::max(w, 0.0));
    } else {
      m.uniform_weight += std::max(w, 0.0);
    }
  }
  m.validate();
  return m;
}

void TemplateFamily::validate(const LargeGame& game) const {
  if (per_type.size() != 1 && per_type.size() != game.num_types()) {
    throw PreconditionError("template family needs one template or one per type");
  }
  for (const auto& t : per_type) t.validate(game.num_actions());
}

// ---------------------------------------------------------------------------

double eta_expectation(const Expr& e, std::size_t K, const McConfig& mc, bool* used_mc) {
  double exact = 0.0;
  Expr rest = Expr::constant(0.0);
  bool need_mc = false;
  for (const auto& [coef, term] : e.additive_terms()) {
    if (term.is_constant()) {
      exact += coef * term.eval({});
      continue;
    }
    auto support = term.single_sum_support();
    if (!support) {
      rest = Expr::add(rest, Expr::mul(Expr::constant(coef), term));
      need_mc = true;
      continue;
    }
    const std::size_t k = support->size();
    const std::size_t lead = support->front();
    std::vector<double> vars(K, 0.0);
    if (k == K) {
      vars[lead] = 1.0;
      exact += coef * term.eval(vars);
      continue;
    }
    auto at = [&](const Expr& g) {
      return [&g, lead, K](double x) {
        std::vector<double> v(K, 0.0);
        v[lead] = x;
        return g.eval(v);
      };
    };
    std::vector<double> breaks;
    for (const Expr& sw : term.switch_functions()) {
      auto roots = sign_change_points(at(sw), 0.0, 1.0);
      breaks.insert(breaks.end(), roots.begin(), roots.end());
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    exact += coef * beta_marginal_expectation(at(term), k, K, kDefaultQuadratureNodes, breaks);
  }
  if (used_mc) *used_mc = need_mc;
  if (!need_mc) return exact;
  if (mc.samples == 0) throw PreconditionError("Monte Carlo sample count must be positive");
  const auto samples = uniform_samples(K, mc.samples, mc.seed);
  double acc = 0.0;
  for (const auto& s : samples) acc += rest.eval(s.weights());
  return exact + acc / static_cast<double>(samples.size());
}

PerturbedEvaluator::PerturbedEvaluator(const LargeGame& game, McConfig mc)
    : game_(&game), mc_(mc) {
  const std::size_t K = game.num_actions();
  eta_.resize(game.num_types() * K);
  for (std::size_t t = 0; t < game.num_types(); ++t) {
    for (std::size_t a = 0; a < K; ++a) {
      bool used = false;
      eta_[t * K + a] = eta_expectation(game.type(t).payoff[a], K, mc_, &used);
      exact_ = exact_ && !used;
    }
  }
}

double PerturbedEvaluator::expected(std::size_t t, std::size_t a,
                                    const PerturbationMeasure& m) const {
  const Expr& u = game_->type(t).payoff.at(a);
  double v = 0.0;
  if (m.base_weight > 0.0) v += m.base_weight * u.eval(m.base.weights());
  for (const auto& [point, w] : m.atoms) {
    if (w > 0.0) v += w * u.eval(point.weights());
  }
  if (m.uniform_weight > 0.0) v += m.uniform_weight * eta_integral(t, a);
  return v;
}

std::vector<double> PerturbedEvaluator::expected_all(std::size_t t,
                                                     const PerturbationMeasure& m) const {
  std::vector<double> out(game_->num_actions());
  for (std::size_t a = 0; a < out.size(); ++a) out[a] = expected(t, a, m);
  return out;
}

double eval_payoff(const LargeGame& game, std::string_view type_id,
                   std::string_view action, const ActionDistribution& tau) {
  const std::size_t t = game.type_index(type_id);
  const std::size_t a = game.action_index(action);
  if (tau.size() != game.num_actions()) throw PreconditionError("tau dimension mismatch");
  return game.payoff(t, a, tau.weights());
}

ActionDistribution societal_summary(const LargeGame& game, const RandomizedProfile& h) {
  if (h.h.size() != game.num_types()) {
    throw PreconditionError("profile must cover every type");
  }
  std::vector<double> tau(game.num_actions(), 0.0);
  for (std::size_t t = 0; t < h.h.size(); ++t) {
    if (h.h[t].size() != tau.size()) throw PreconditionError("profile dimension mismatch");
    for (std::size_t a = 0; a < tau.size(); ++a) tau[a] += game.type(t).mass * h.h[t][a];
  }
  // Masses sum to 1 only within 1e-12; renormalize so the result is a valid point.
  const double s = std::accumulate(tau.begin(), tau.end(), 0.0);
  for (double& x : tau) x /= s;
  return ActionDistribution(std::move(tau));
}

double expected_payoff(const LargeGame& game, std::string_view type_id,
                       std::string_view action, const PerturbationMeasure& m,
                       const McConfig& mc) {
  m.validate();
  const std::size_t t = game.type_index(type_id);
  const std::size_t a = game.action_index(action);
  const Expr& u = game.type(t).payoff[a];
  double v = m.base_weight * u.eval(m.base.weights());
  for (const auto& [point, w] : m.atoms) v += w * u.eval(point.weights());
  if (m.uniform_weight > 0.0) {
    v += m.uniform_weight * eta_expectation(u, game.num_actions(), mc);
  }
  return v;
}

std::vector<std::size_t> best_responses(const PerturbedEvaluator& ev, std::size_t t,
                                        const PerturbationMeasure& m, double tol) {
  if (tol < 0.0) throw PreconditionError("tolerance must be nonnegative");
  const auto vals = ev.expected_all(t, m);
  const double best = *std::max_element(vals.begin(), vals.end());
  std::vector<std::size_t> out;
  for (std::size_t a = 0; a < vals.size(); ++a) {
    if (vals[a] >= best - tol) out.push_back(a);
  }
  return out;
}

std::vector<std::string> best_responses(const LargeGame& game, std::string_view type_id,
                                        const PerturbationMeasure& m, double tol,
                                        const McConfig& mc) {
  m.validate();
  PerturbedEvaluator ev(game, mc);
  std::vector<std::string> out;
  for (std::size_t a : best_responses(ev, game.type_index(type_id), m, tol)) {
    out.push_back(game.actions()[a]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// File formats

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double parse_fraction(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  auto number = [&](std::string_view s) {
    s = trim(s);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || s.empty()) {
      throw ParseError("", "malformed number '" + std::string(s) + "'");
    }
    return v;
  };
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) return number(text);
  const double den = number(text.substr(slash + 1));
  if (den == 0.0) throw ParseError("", "zero denominator in '" + std::string(text) + "'");
  return number(text.substr(0, slash)) / den;
}

namespace {

VariableResolver action_resolver(const std::vector<std::string>& actions) {
  VariableResolver r;
  r.call = [&actions](std::string_view fn, std::string_view arg) -> std::optional<std::size_t> {
    if (fn != "tau") return std::nullopt;
    for (std::size_t k = 0; k < actions.size(); ++k) {
      if (actions[k] == arg) return k;
    }
    return std::nullopt;
  };
  return r;
}

// Points of the simplex where the coordinate sum named by `selector` equals t.
std::vector<std::vector<double>> simplex_probes(const Expr& selector, double t, std::size_t K,
                                                const std::vector<ActionDistribution>& base) {
  auto support = selector.as_variable_sum();
  if (!support) {
    throw ModelError("piecewise selector must be a coordinate or a sum of coordinates");
  }
  std::vector<std::vector<double>> out;
  if (t < 0.0 || t > 1.0 || support->size() == K) return out;
  std::vector<bool> in(K, false);
  for (std::size_t k : *support) in[k] = true;
  for (const auto& b : base) {
    double s = 0.0;
    for (std::size_t k : *support) s += b[k];
    if (s <= 0.0 || s >= 1.0) continue;
    std::vector<double> p(K);
    for (std::size_t k = 0; k < K; ++k) {
      p[k] = in[k] ? b[k] * t / s : b[k] * (1.0 - t) / (1.0 - s);
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<double> parse_weights(const json& j, std::size_t K, const std::string& context) {
  if (!j.is_array() || j.size() != K) {
    throw ParseError(context, "expected an array of " + std::to_string(K) + " weights");
  }
  std::vector<double> w;
  for (const auto& x : j) {
    if (x.is_number()) {
      w.push_back(x.get<double>());
    } else if (x.is_string()) {
      try {
        w.push_back(parse_fraction(x.get<std::string>()));
      } catch (const ParseError& e) {
        throw ParseError(context, e.what());
      }
    } else {
      throw ParseError(context, "weights must be numbers or fraction strings");
    }
  }
  return w;
}

ActionDistribution make_distribution(std::vector<double> w, const std::string& context) {
  try {
    return ActionDistribution(std::move(w));
  } catch (const PreconditionError& e) {
    throw ParseError(context, e.what());
  }
}

RandomizedProfile profile_from_json(const LargeGame& game, const json& j,
                                    const std::string& context) {
  if (!j.is_object()) throw ParseError(context, "profile must map type ids to weights");
  RandomizedProfile h;
  for (const PayoffType& t : game.types()) {
    if (!j.contains(t.id)) throw ParseError(context, "profile is missing type '" + t.id + "'");
    const std::string ctx = context + "." + t.id;
    h.h.push_back(make_distribution(parse_weights(j.at(t.id), game.num_actions(), ctx), ctx));
  }
  for (const auto& [key, _] : j.items()) {
    try {
      game.type_index(key);
    } catch (const LookupError&) {
      throw ParseError(context, "profile names unknown type '" + key + "'");
    }
  }
  return h;
}

}  // namespace

GameFile parse_game(std::string_view json_text, const std::string& context) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(context, e.what());
  }
  if (!j.is_object() || !j.contains("actions") || !j.contains("types")) {
    throw ParseError(context, "game file needs \"actions\" and \"types\"");
  }
  std::vector<std::string> actions;
  for (const auto& a : j.at("actions")) {
    if (!a.is_string()) throw ParseError(context + ".actions", "action names must be strings");
    actions.push_back(a.get<std::string>());
  }
  const std::size_t K = actions.size();
  const VariableResolver resolver = action_resolver(actions);
  std::vector<ActionDistribution> probe_base = uniform_samples(std::max<std::size_t>(K, 2), 24, 7);
  if (K >= 2) {
    for (const auto& g : simplex_grid(K, 4)) probe_base.push_back(g);
  }

  std::vector<PayoffType> types;
  std::size_t ti = 0;
  for (const auto& jt : j.at("types")) {
    const std::string ctx = context + ".types[" + std::to_string(ti++) + "]";
    if (!jt.is_object() || !jt.contains("id") || !jt.contains("mass") || !jt.contains("payoff")) {
      throw ParseError(ctx, "type needs \"id\", \"mass\", and \"payoff\"");
    }
    PayoffType t;
    t.id = jt.at("id").get<std::string>();
    const auto& jm = jt.at("mass");
    t.mass = jm.is_string() ? parse_fraction(jm.get<std::string>()) : jm.get<double>();
    const auto& jp = jt.at("payoff");
    for (const std::string& a : actions) {
      if (!jp.contains(a)) throw ParseError(ctx, "missing payoff for action '" + a + "'");
      const std::string pctx = ctx + ".payoff." + a;
      const auto& src = jp.at(a);
      Expr e = src.is_number()
                   ? Expr::constant(src.get<double>())
                   : parse_expression(src.get<std::string>(), resolver, pctx);
      std::optional<std::string> jump;
      try {
        jump = find_discontinuity(e, [&](const Expr& sel, double th) {
          return simplex_probes(sel, th, K, probe_base);
        });
      } catch (const ModelError& err) {
        throw ParseError(pctx, err.what());
      }
      if (jump) throw ModelError(pctx + ": payoff is discontinuous: " + *jump);
      t.payoff.push_back(std::move(e));
    }
    types.push_back(std::move(t));
  }
  // Masses written as decimals (e.g. three thirds) rarely sum to 1 exactly.
  double total = 0.0;
  for (const auto& t : types) total += t.mass;
  if (std::abs(total - 1.0) <= 1e-9) {
    for (auto& t : types) t.mass /= total;
  }
  GameFile file{LargeGame(std::move(actions), std::move(types)), {}};
  if (j.contains("named_profiles")) {
    for (const auto& [name, jp] : j.at("named_profiles").items()) {
      file.named_profiles.emplace(
          name, profile_from_json(file.game, jp, context + ".named_profiles." + name));
    }
  }
  return file;
}

GameFile load_game(const std::string& path) { return parse_game(read_text_file(path), path); }

std::string game_to_json(const LargeGame& game) {
  json j;
  j["actions"] = game.actions();
  j["types"] = json::array();
  for (std::size_t t = 0; t < game.num_types(); ++t) {
    json jt;
    jt["id"] = game.type(t).id;
    jt["mass"] = game.type(t).mass;
    for (std::size_t a = 0; a < game.num_actions(); ++a) {
      jt["payoff"][game.actions()[a]] = game.payoff_string(t, a);
    }
    j["types"].push_back(std::move(jt));
  }
  return j.dump(2);
}

RandomizedProfile parse_profile_json(const LargeGame& game, std::string_view json_text,
                                     const std::string& context) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(context, e.what());
  }
  if (!j.is_object() || !j.contains("profiles")) {
    throw ParseError(context, "profile file needs a \"profiles\" object");
  }
  return profile_from_json(game, j.at("profiles"), context + ".profiles");
}

RandomizedProfile resolve_profile(const GameFile& file, const std::string& arg) {
  const LargeGame& game = file.game;
  if (auto it = file.named_profiles.find(arg); it != file.named_profiles.end()) {
    return it->second;
  }
  std::error_code ec;
  if (std::filesystem::is_regular_file(arg, ec)) {
    return parse_profile_json(game, read_text_file(arg), arg);
  }
  auto split = [](std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
      const auto pos = s.find(sep, start);
      parts.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
      if (pos == std::string_view::npos) return parts;
      start = pos + 1;
    }
  };
  auto weights = [&](std::string_view s) {
    std::vector<double> w;
    for (auto part : split(s, ',')) {
      try {
        w.push_back(parse_fraction(part));
      } catch (const ParseError&) {
        throw ParseError("--profile", "'" + arg +
                                          "' is not a named profile, a file, or a weight list");
      }
    }
    if (w.size() != game.num_actions()) {
      throw ParseError("--profile", "expected " + std::to_string(game.num_actions()) +
                                        " weights in '" + std::string(s) + "'");
    }
    return make_distribution(std::move(w), "--profile");
  };
  if (arg.find('=') == std::string::npos) {
    return RandomizedProfile::symmetric(game, weights(arg));
  }
  RandomizedProfile h;
  h.h.resize(game.num_types());
  std::vector<bool> given(game.num_types(), false);
  for (auto entry : split(arg, ';')) {
    const auto eq = entry.find('=');
    if (eq == std::string_view::npos) throw ParseError("--profile", "expected type=weights");
    std::size_t t = 0;
    try {
      t = game.type_index(entry.substr(0, eq));
    } catch (const LookupError& e) {
      throw ParseError("--profile", e.what());
    }
    h.h[t] = weights(entry.substr(eq + 1));
    given[t] = true;
  }
  for (std::size_t t = 0; t < given.size(); ++t) {
    if (!given[t]) throw ParseError("--profile", "missing type '" + game.type(t).id + "'");
  }
  return h;
}

}  // namespace rpe
