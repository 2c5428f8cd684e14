#include "rpe/checkers.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <set>
#include <sstream>

#include "rpe/errors.hpp"
#include "rpe/lp.hpp"

namespace rpe {

namespace {

using Verdict = CheckReport::Verdict;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt_vec(std::span<const double> v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "]";
}

void check_profile_shape(const LargeGame& game, const RandomizedProfile& h) {
  if (h.h.size() != game.num_types()) {
    throw PreconditionError("profile has " + std::to_string(h.h.size()) + " types, game has " +
                            std::to_string(game.num_types()));
  }
  for (const auto& d : h.h) {
    if (d.size() != game.num_actions()) throw PreconditionError("profile dimension mismatch");
  }
}

std::vector<double> payoffs_at(const LargeGame& game, std::size_t t,
                               std::span<const double> tau) {
  std::vector<double> u(game.num_actions());
  for (std::size_t a = 0; a < u.size(); ++a) u[a] = game.payoff(t, a, tau);
  return u;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

// Points on the simplex with the coordinates in S summing to s, spread over
// S and its complement on grids of resolution m.
void face_points(std::size_t K, const std::vector<std::size_t>& S, double s, std::size_t m,
                 std::vector<ActionDistribution>& out) {
  std::vector<std::size_t> comp;
  for (std::size_t k = 0; k < K; ++k) {
    if (!std::binary_search(S.begin(), S.end(), k)) comp.push_back(k);
  }
  if (comp.empty()) return;
  const auto inner = simplex_grid(S.size(), m);
  const auto outer = simplex_grid(comp.size(), m);
  for (const auto& p : inner) {
    for (const auto& q : outer) {
      std::vector<double> x(K, 0.0);
      for (std::size_t i = 0; i < S.size(); ++i) x[S[i]] = s * p[i];
      for (std::size_t i = 0; i < comp.size(); ++i) x[comp[i]] = (1.0 - s) * q[i];
      out.emplace_back(std::move(x));
    }
  }
}

// All ways to write n as an ordered sum of k nonnegative parts, in reverse
// lexicographic order.
std::vector<std::vector<std::size_t>> compositions(std::size_t n, std::size_t k) {
  if (k == 1) return {{n}};
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t first = n + 1; first-- > 0;) {
    for (auto& tail : compositions(n - first, k - 1)) {
      tail.insert(tail.begin(), first);
      out.push_back(std::move(tail));
    }
  }
  return out;
}

}  // namespace

void CheckReport::echo(std::string key, double v) { echo(std::move(key), fmt(v)); }

std::optional<double> CheckReport::find_margin(const std::string& key) const {
  for (const auto& [k, v] : margins) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const char* to_string(CheckReport::Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    case Verdict::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

namespace {

nlohmann::ordered_json report_json(const CheckReport& r) {
  nlohmann::ordered_json j;
  j["check"] = r.check;
  j["verdict"] = to_string(r.verdict);
  j["message"] = r.message;
  auto& ws = j["witnesses"] = nlohmann::ordered_json::array();
  for (const auto& w : r.witnesses) {
    nlohmann::ordered_json jw;
    if (!w.type.empty()) jw["type"] = w.type;
    if (!w.action.empty()) jw["action"] = w.action;
    if (!w.other.empty()) jw["other"] = w.other;
    if (!w.point.empty()) jw["point"] = w.point;
    if (!w.mixture.empty()) jw["mixture"] = w.mixture;
    jw["value"] = w.value;
    if (!w.note.empty()) jw["note"] = w.note;
    ws.push_back(std::move(jw));
  }
  auto& ms = j["margins"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.margins) {
    if (std::isfinite(v)) {
      ms[k] = v;
    } else {
      ms[k] = v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
    }
  }
  auto& cs = j["config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.config) cs[k] = v;
  j["notes"] = r.notes;
  if (!r.parts.empty()) {
    auto& ps = j["parts"] = nlohmann::ordered_json::array();
    for (const auto& p : r.parts) ps.push_back(report_json(p));
  }
  return j;
}

}  // namespace

std::string report_to_json(const CheckReport& r, int indent) { return report_json(r).dump(indent); }

// ---------------------------------------------------------------------------

CheckReport check_nash(const LargeGame& game, const RandomizedProfile& h, double tol) {
  check_profile_shape(game, h);
  CheckReport r;
  r.check = "nash";
  r.echo("tol", tol);
  const auto tau = societal_summary(game, h);
  double worst = 0.0;
  double weighted = 0.0;
  for (std::size_t t = 0; t < game.num_types(); ++t) {
    const auto u = payoffs_at(game, t, tau.weights());
    const std::size_t best = argmax(u);
    double mean = 0.0;
    for (std::size_t a = 0; a < u.size(); ++a) {
      const double w = h.h[t][a];
      mean += w * u[a];
      if (w <= tol) continue;
      const double gap = u[best] - u[a];
      worst = std::max(worst, gap);
      if (gap > tol) {
        r.witnesses.push_back({game.type(t).id, game.actions()[a], game.actions()[best],
                               tau.vec(), {}, gap, "a better action exists at the summary"});
      }
    }
    weighted += game.type(t).mass * (u[best] - mean);
  }
  r.margin("max_regret", worst);
  r.margin("mass_weighted_regret", weighted);
  if (r.witnesses.empty()) {
    r.verdict = Verdict::Pass;
    r.message = "every supported action is a best response at the summary";
  } else {
    r.verdict = Verdict::Fail;
    r.message = "a supported action is not a best response";
  }
  return r;
}

// ---------------------------------------------------------------------------

std::vector<ActionDistribution> dominance_grid(const LargeGame& game, std::size_t m,
                                               bool breakpoints) {
  if (m < 2) throw PreconditionError("dominance grid needs m >= 2");
  const std::size_t K = game.num_actions();
  auto grid = simplex_grid(K, m);
  if (!breakpoints) return grid;
  std::set<std::pair<std::vector<std::size_t>, double>> faces;
  for (const auto& type : game.types()) {
    for (const auto& e : type.payoff) {
      for (const auto& sw : e.switch_functions()) {
        auto S = sw.single_sum_support();
        if (!S || S->empty() || S->size() == K) continue;
        const auto along = [&](double s) {
          std::vector<double> x(K, 0.0);
          for (auto k : *S) x[k] = s / static_cast<double>(S->size());
          std::size_t rest = K - S->size();
          for (std::size_t k = 0; k < K; ++k) {
            if (!std::binary_search(S->begin(), S->end(), k)) {
              x[k] = (1.0 - s) / static_cast<double>(rest);
            }
          }
          return sw.eval(x);
        };
        for (double s : sign_change_points(along, 0.0, 1.0)) faces.emplace(*S, s);
        // Roots sitting exactly on a grid node are missed by sign changes.
        for (std::size_t i = 0; i <= m; ++i) {
          const double s = static_cast<double>(i) / static_cast<double>(m);
          if (along(s) == 0.0) faces.emplace(*S, s);
        }
      }
    }
  }
  for (const auto& [S, s] : faces) face_points(K, S, s, m, grid);
  return grid;
}

CheckReport check_admissible(const LargeGame& game, const RandomizedProfile& h,
                             const AdmissibleOptions& opts) {
  check_profile_shape(game, h);
  const double tol = opts.tol;
  CheckReport r;
  r.check = "admissible";
  r.echo("grid", static_cast<double>(opts.grid));
  r.echo("tol", tol);
  r.echo("breakpoints", opts.breakpoints ? "true" : "false");
  const auto grid = dominance_grid(game, opts.grid, opts.breakpoints);
  r.margin("grid_points", static_cast<double>(grid.size()));
  const std::size_t K = game.num_actions();
  const std::size_t G = grid.size();
  bool numerical_failure = false;
  double worst_strict = -std::numeric_limits<double>::infinity();

  for (std::size_t t = 0; t < game.num_types(); ++t) {
    std::vector<std::vector<double>> U(G);
    for (std::size_t g = 0; g < G; ++g) U[g] = payoffs_at(game, t, grid[g].weights());
    for (std::size_t a = 0; a < K; ++a) {
      if (h.h[t][a] <= tol) continue;
      const auto& tid = game.type(t).id;
      const auto& aname = game.actions()[a];

      // Pure dominators first, so the simplest witness is reported.
      bool found = false;
      for (std::size_t k = 0; k < K && !found; ++k) {
        if (k == a) continue;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        std::size_t at = 0;
        for (std::size_t g = 0; g < G; ++g) {
          const double d = U[g][k] - U[g][a];
          lo = std::min(lo, d);
          if (d > hi) {
            hi = d;
            at = g;
          }
        }
        if (lo >= -tol && hi > tol) {
          r.witnesses.push_back({tid, aname, game.actions()[k], grid[at].vec(),
                                 ActionDistribution::vertex(K, k).vec(), hi,
                                 "weakly dominated by a pure action"});
          found = true;
        }
      }
      if (found) continue;

      // Strict dominance by a mixture: maximize s with s <= xi . d(g).
      LinearProgram lp1;
      lp1.c.assign(K + 2, 0.0);
      lp1.c[K] = 1.0;
      lp1.c[K + 1] = -1.0;
      for (std::size_t g = 0; g < G; ++g) {
        std::vector<double> row(K + 2, 0.0);
        for (std::size_t k = 0; k < K; ++k) row[k] = -(U[g][k] - U[g][a]);
        row[K] = 1.0;
        row[K + 1] = -1.0;
        lp1.A_ub.push_back(std::move(row));
        lp1.b_ub.push_back(0.0);
      }
      std::vector<double> ones(K + 2, 0.0);
      std::fill(ones.begin(), ones.begin() + static_cast<std::ptrdiff_t>(K), 1.0);
      lp1.A_eq.push_back(ones);
      lp1.b_eq.push_back(1.0);
      const auto res1 = solve_lp(lp1);
      if (res1.status != LpResult::Status::Optimal) {
        numerical_failure = true;
        r.notes.push_back("LP for " + tid + "/" + aname + " ended with status " +
                          to_string(res1.status));
        continue;
      }
      worst_strict = std::max(worst_strict, res1.objective);
      std::vector<double> xi(res1.x.begin(), res1.x.begin() + static_cast<std::ptrdiff_t>(K));
      if (res1.objective > tol) {
        r.witnesses.push_back({tid, aname, "", {}, xi, res1.objective,
                               "strictly dominated by a mixture on the grid"});
        continue;
      }

      // Weak dominance: maximize total surplus subject to xi . d(g) >= 0. A
      // slack of -tol here would let the LP buy tiny surpluses with tiny
      // losses, so the tolerance is applied only when judging the optimum.
      LinearProgram lp2;
      lp2.c.assign(K, 0.0);
      for (std::size_t g = 0; g < G; ++g) {
        std::vector<double> row(K);
        for (std::size_t k = 0; k < K; ++k) {
          const double d = U[g][k] - U[g][a];
          lp2.c[k] += d;
          row[k] = -d;
        }
        lp2.A_ub.push_back(std::move(row));
        lp2.b_ub.push_back(0.0);
      }
      lp2.A_eq.push_back(std::vector<double>(K, 1.0));
      lp2.b_eq.push_back(1.0);
      const auto res2 = solve_lp(lp2);
      if (res2.status != LpResult::Status::Optimal) {
        numerical_failure = true;
        r.notes.push_back("surplus LP for " + tid + "/" + aname + " ended with status " +
                          to_string(res2.status));
        continue;
      }
      double best = -std::numeric_limits<double>::infinity();
      double least = std::numeric_limits<double>::infinity();
      std::size_t at = 0;
      for (std::size_t g = 0; g < G; ++g) {
        double s = 0.0;
        for (std::size_t k = 0; k < K; ++k) s += res2.x[k] * (U[g][k] - U[g][a]);
        least = std::min(least, s);
        if (s > best) {
          best = s;
          at = g;
        }
      }
      if (best > tol && least >= -tol) {
        r.witnesses.push_back({tid, aname, "", grid[at].vec(), res2.x, best,
                               "weakly dominated by a mixture on the grid"});
      }
    }
  }
  r.margin("max_strict_dominance", worst_strict);
  if (!r.witnesses.empty()) {
    r.verdict = Verdict::Fail;
    r.message = "a supported action is weakly dominated on the grid";
  } else if (numerical_failure) {
    r.verdict = Verdict::Inconclusive;
    r.message = "dominance LP did not solve";
  } else {
    r.verdict = Verdict::Pass;
    r.message = "no supported action is weakly dominated on the grid";
    r.notes.push_back("pass on a finite grid of summaries; dominance off the grid is not excluded");
  }
  return r;
}

// ---------------------------------------------------------------------------

namespace {

void require_full_support(const LargeGame& game, const TemplateFamily& family) {
  family.validate(game);
  for (const auto& t : family.per_type) {
    if (!t.full_support()) {
      throw PreconditionError("perturbation family must give eta positive weight (full support)");
    }
  }
}

std::string family_string(const LargeGame& game, const TemplateFamily& family) {
  std::string s;
  for (std::size_t i = 0; i < family.per_type.size(); ++i) {
    if (i) s += "; ";
    if (family.per_type.size() > 1) s += game.type(i).id + ": ";
    bool first = true;
    for (const auto& c : family.per_type[i].components) {
      if (!first) s += " + ";
      first = false;
      s += "(" + fmt(c.linear) + " eps";
      if (c.quadratic != 0.0) s += " + " + fmt(c.quadratic) + " eps^2";
      s += ") " + (c.point ? fmt_vec(c.point->weights()) : std::string("eta"));
    }
  }
  return s;
}

}  // namespace

CheckReport check_eps_rpe(const LargeGame& game, const RandomizedProfile& h, double eps,
                          const TemplateFamily& family, const EpsRpeOptions& opts) {
  const PerturbedEvaluator ev(game, opts.mc);
  return check_eps_rpe(ev, h, eps, family, opts);
}

CheckReport check_eps_rpe(const PerturbedEvaluator& ev, const RandomizedProfile& h, double eps,
                          const TemplateFamily& family, const EpsRpeOptions& opts) {
  const LargeGame& game = ev.game();
  check_profile_shape(game, h);
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("epsilon must lie in (0, 1)");
  require_full_support(game, family);
  if (!(opts.rational_mass > 1.0 - eps && opts.rational_mass <= 1.0)) {
    throw PreconditionError("rational mass must lie in (1 - eps, 1]");
  }
  CheckReport r;
  r.check = "eps-rpe";
  r.echo("epsilon", eps);
  r.echo("rational_mass", opts.rational_mass);
  r.echo("tol", opts.tol);
  r.echo("family", family_string(game, family));
  if (!ev.exact()) {
    r.echo("mc_samples", static_cast<double>(ev.mc().samples));
    r.echo("mc_seed", static_cast<double>(ev.mc().seed));
  }
  r.notes.push_back(
      "the perturbation keeps exactly 1 - eps on the summary; any base weight >= 1 - eps is "
      "accepted");

  const double min_w = h.min_weight();
  r.margin("min_weight", min_w);
  if (!(min_w > 0.0)) {
    for (std::size_t t = 0; t < game.num_types(); ++t) {
      for (std::size_t a = 0; a < game.num_actions(); ++a) {
        if (!(h.h[t][a] > 0.0)) {
          r.witnesses.push_back({game.type(t).id, game.actions()[a], "", {}, {}, h.h[t][a],
                                 "profile is not full support"});
        }
      }
    }
    r.verdict = Verdict::Fail;
    r.message = "profile is not full support";
    return r;
  }

  const auto tau = societal_summary(game, h);
  double ok_mass = 0.0;
  double worst_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < game.num_types(); ++t) {
    const auto m = family.for_type(t).apply(tau, eps);
    if (m.base_weight < 1.0 - eps - 1e-15) throw PreconditionError("base weight below 1 - eps");
    const auto U = ev.expected_all(t, m);
    const std::size_t best = argmax(U);
    bool ok = true;
    for (std::size_t a = 0; a < U.size(); ++a) {
      if (!(U[a] < U[best] - opts.tol)) continue;
      const double excess = h.h[t][a] - eps;
      worst_excess = std::max(worst_excess, excess);
      if (excess > 1e-12) {
        ok = false;
        r.witnesses.push_back({game.type(t).id, game.actions()[a], game.actions()[best],
                               tau.vec(), {}, U[best] - U[a],
                               "strictly worse action carries weight " + fmt(h.h[t][a]) +
                                   " > eps"});
      }
    }
    if (ok) ok_mass += game.type(t).mass;
  }
  r.margin("rational_mass_found", ok_mass);
  r.margin("max_excess_weight", worst_excess);
  if (ok_mass >= opts.rational_mass - 1e-12) {
    r.verdict = Verdict::Pass;
    r.message = "full support, and strictly worse actions carry at most eps on enough mass";
  } else {
    r.verdict = Verdict::Fail;
    r.message = "types of mass " + fmt(1.0 - ok_mass) + " put more than eps on a worse action";
  }
  return r;
}

// ---------------------------------------------------------------------------

CheckReport check_aggregate_robustness_certificate(const LargeGame& game,
                                                   const RandomizedProfile& h,
                                                   const TemplateFamily& family,
                                                   const CertificateOptions& opts) {
  const PerturbedEvaluator ev(game, opts.mc);
  return check_aggregate_robustness_certificate(ev, h, family, opts);
}

CheckReport check_aggregate_robustness_certificate(const PerturbedEvaluator& ev,
                                                   const RandomizedProfile& h,
                                                   const TemplateFamily& family,
                                                   const CertificateOptions& opts) {
  const LargeGame& game = ev.game();
  check_profile_shape(game, h);
  require_full_support(game, family);
  opts.schedule.validate();
  CheckReport r;
  r.check = "aggregate-robustness";
  r.echo("family", family_string(game, family));
  r.echo("n_max", static_cast<double>(opts.schedule.size()));
  r.echo("eps_first", opts.schedule.eps.front());
  r.echo("eps_last", opts.schedule.eps.back());
  r.echo("tol", opts.tol);
  const auto tau = societal_summary(game, h);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < opts.schedule.size(); ++i) {
    const double eps = opts.schedule.eps[i];
    for (std::size_t t = 0; t < game.num_types(); ++t) {
      const auto m = family.for_type(t).apply(tau, eps);
      const auto U = ev.expected_all(t, m);
      const std::size_t best = argmax(U);
      for (std::size_t a = 0; a < U.size(); ++a) {
        if (h.h[t][a] <= opts.tol) continue;
        const double gap = U[best] - U[a];
        worst = std::max(worst, gap);
        if (gap > opts.tol) {
          r.witnesses.push_back({game.type(t).id, game.actions()[a], game.actions()[best],
                                 tau.vec(), {}, gap,
                                 "not a best response at n = " +
                                     std::to_string(opts.schedule.n[i]) + ", eps = " + fmt(eps)});
        }
      }
    }
  }
  r.margin("worst_gap", worst);
  r.notes.push_back(
      "certificate along the given family only; failure does not show that no family exists");
  if (r.witnesses.empty()) {
    r.verdict = Verdict::Pass;
    r.message = "every supported action is a best response along the family";
  } else {
    r.verdict = Verdict::Fail;
    r.message = "a supported action is not a best response along the family";
  }
  return r;
}

CheckReport search_perturbation_certificate(const LargeGame& game, const RandomizedProfile& h,
                                            const SearchOptions& opts) {
  check_profile_shape(game, h);
  if (opts.resolution < 1) throw PreconditionError("search resolution must be >= 1");
  const std::size_t K = game.num_actions();
  const std::size_t R = opts.resolution;
  const PerturbedEvaluator ev(game, opts.certificate.mc);

  CheckReport r;
  r.check = "certificate-search";
  r.echo("resolution", static_cast<double>(R));
  r.echo("n_max", static_cast<double>(opts.certificate.schedule.size()));
  r.echo("tol", opts.certificate.tol);

  // Integer weights c_0..c_{K-1} on vertices and c_u >= 1 on eta, summing to
  // R; eta-heavy families first.
  double best_gap = std::numeric_limits<double>::infinity();
  std::vector<double> best_params;
  std::size_t tried = 0;
  for (std::size_t cu = R; cu >= 1; --cu) {
    for (const auto& c : compositions(R - cu, K)) {
      std::vector<double> w(K);
      for (std::size_t k = 0; k < K; ++k) w[k] = static_cast<double>(c[k]) / static_cast<double>(R);
      const double wu = static_cast<double>(cu) / static_cast<double>(R);
      const auto fam = TemplateFamily::shared(PerturbationTemplate::vertex_mix(K, w, wu));
      const auto rep = check_aggregate_robustness_certificate(ev, h, fam, opts.certificate);
      ++tried;
      const double gap = rep.find_margin("worst_gap").value_or(0.0);
      std::vector<double> params = w;
      params.push_back(wu);
      if (rep.passed()) {
        r.verdict = Verdict::Pass;
        r.message = "found a certifying family";
        r.witnesses.push_back({"", "", "", {}, params, gap,
                               "vertex weights then eta weight, each times eps"});
        r.margin("families_tried", static_cast<double>(tried));
        r.parts.push_back(rep);
        return r;
      }
      if (gap < best_gap) {
        best_gap = gap;
        best_params = params;
      }
    }
  }
  r.verdict = Verdict::Fail;
  r.message = "no certificate within the search grid; this does not show that none exists";
  r.margin("families_tried", static_cast<double>(tried));
  r.margin("best_worst_gap", best_gap);
  r.witnesses.push_back({"", "", "", {}, best_params, best_gap,
                         "closest family: vertex weights then eta weight"});
  return r;
}

TieProbeResult probe_joint_best_response(const PerturbedEvaluator& ev, std::size_t type,
                                         std::size_t a, std::size_t b, double floor_value,
                                         std::size_t trials, std::uint64_t seed, double tol) {
  const std::size_t K = ev.game().num_actions();
  if (a >= K || b >= K || type >= ev.game().num_types()) {
    throw PreconditionError("probe index out of range");
  }
  TieProbeResult out;
  out.trials = trials;
  out.closest_gap = std::numeric_limits<double>::infinity();
  const auto bases = uniform_samples(K, trials, seed);
  const auto atoms = uniform_samples(K, trials, seed + 1);
  Rng rng(seed, 2);
  for (std::size_t i = 0; i < trials; ++i) {
    PerturbationMeasure m;
    m.base = bases[i];
    const double eps = std::max(rng.uniform(), 1e-6);
    const double split = rng.uniform();
    m.base_weight = 1.0 - eps;
    m.atoms.emplace_back(atoms[i], eps * split);
    m.uniform_weight = eps * (1.0 - split);
    if (!(m.uniform_weight > 0.0)) m.uniform_weight = eps * 1e-6;
    const double ua = ev.expected(type, a, m);
    const double ub = ev.expected(type, b, m);
    if (std::min(ua, ub) >= floor_value) {
      const double gap = std::abs(ua - ub);
      if (gap < out.closest_gap) {
        out.closest_gap = gap;
        out.closest_base = m.base.vec();
      }
      if (gap <= tol) ++out.hits;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

CheckReport check_potential(const LargeGame& game, const std::vector<Expr>& potential,
                            std::size_t m, double tol) {
  const std::size_t K = game.num_actions();
  if (potential.size() != K) throw PreconditionError("potential needs one expression per action");
  CheckReport r;
  r.check = "potential";
  r.echo("grid", static_cast<double>(m));
  r.echo("tol", tol);
  const auto grid = simplex_grid(K, m);
  double worst = 0.0;
  for (std::size_t t = 0; t < game.num_types(); ++t) {
    Witness w;
    double type_worst = 0.0;
    for (const auto& g : grid) {
      std::vector<double> d(K);
      for (std::size_t a = 0; a < K; ++a) {
        d[a] = game.payoff(t, a, g.weights()) - potential[a].eval(g.weights());
      }
      const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
      const double spread = *hi - *lo;
      if (spread > type_worst) {
        type_worst = spread;
        w = {game.type(t).id, game.actions()[static_cast<std::size_t>(hi - d.begin())],
             game.actions()[static_cast<std::size_t>(lo - d.begin())], g.vec(), {}, spread,
             "payoff difference and potential difference disagree"};
      }
    }
    worst = std::max(worst, type_worst);
    if (type_worst > tol) r.witnesses.push_back(std::move(w));
  }
  r.margin("max_violation", worst);
  if (r.witnesses.empty()) {
    r.verdict = Verdict::Pass;
    r.message = "payoff differences match potential differences on the grid";
  } else {
    r.verdict = Verdict::Fail;
    r.message = "payoff differences do not match the potential";
  }
  return r;
}

PotentialSearch find_potential(const LargeGame& game, std::size_t m, double tol) {
  if (m < 2) throw PreconditionError("potential grid needs m >= 2");
  const auto& u0 = game.type(0).payoff;
  std::vector<Expr> P;
  P.reserve(u0.size());
  for (const auto& e : u0) P.push_back(Expr::sub(e, u0.front()));
  PotentialSearch out;
  out.report = check_potential(game, P, m, tol);
  out.report.check = "find-potential";
  if (out.report.passed()) out.potential = std::move(P);
  return out;
}

// ---------------------------------------------------------------------------

TwoPathConstruction two_path_construction(const PerturbedEvaluator& ev,
                                          const RandomizedProfile& h, double eps) {
  const LargeGame& game = ev.game();
  if (game.num_actions() != 2 || game.num_types() != 1) {
    throw PreconditionError("the two-path construction needs two actions and one type");
  }
  check_profile_shape(game, h);
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("epsilon must lie in (0, 1)");
  const auto tau = societal_summary(game, h);
  auto D = [&](double x) {
    const std::vector<double> p{x, 1.0 - x};
    return game.payoff(0, 0, p) - game.payoff(0, 1, p);
  };
  const double D_eta = ev.eta_integral(0, 0) - ev.eta_integral(0, 1);
  constexpr std::size_t kScan = 2000;
  double dmax = -std::numeric_limits<double>::infinity();
  double dmin = std::numeric_limits<double>::infinity();
  double xmax = 0.0;
  double xmin = 0.0;
  for (std::size_t i = 0; i <= kScan; ++i) {
    const double x = static_cast<double>(i) / kScan;
    const double d = D(x);
    if (d > dmax) {
      dmax = d;
      xmax = x;
    }
    if (d < dmin) {
      dmin = d;
      xmin = x;
    }
  }

  TwoPathConstruction out;
  auto point = [](double x) { return ActionDistribution({x, 1.0 - x}); };
  if (std::max(std::abs(dmax), std::abs(dmin)) <= 1e-12 && std::abs(D_eta) <= 1e-12) {
    out.kind = "tie";
    out.family = TemplateFamily::shared(PerturbationTemplate::standard());
    out.h_eps.h = {mix(std::vector{h.h[0], ActionDistribution::uniform(2)},
                       std::vector{1.0 - eps, eps})};
    return out;
  }

  const bool interior = tau[0] > 1e-12 && tau[1] > 1e-12;
  if (interior) {
    // zeta = w delta_{tau2} + (1 - w) eta with zeta(D) = 0, so the tie at
    // tau* survives the perturbation.
    PerturbationTemplate tmpl;
    if (std::abs(D_eta) <= 1e-15) {
      tmpl = PerturbationTemplate::standard();
    } else {
      const double d2 = D_eta > 0 ? dmin : dmax;
      const double x2 = D_eta > 0 ? xmin : xmax;
      if (d2 * D_eta >= 0.0) {
        throw ModelError("no perturbation restores the tie: one action is weakly dominated");
      }
      const double w = D_eta / (D_eta - d2);
      tmpl.components.push_back({point(x2), w, 0.0});
      tmpl.components.push_back({std::nullopt, 1.0 - w, 0.0});
    }
    out.kind = "interior";
    out.family = TemplateFamily::shared(std::move(tmpl));
    out.h_eps.h = {mix(std::vector{h.h[0], tau}, std::vector{1.0 - eps, eps})};
    return out;
  }

  // Boundary: everyone uses p. zeta gives p a strict advantage rho > 0.
  const std::size_t p = tau[0] >= tau[1] ? 0 : 1;
  const std::size_t q = 1 - p;
  const double sgn = p == 0 ? 1.0 : -1.0;
  const double Dp_eta = sgn * D_eta;
  const double Dp_best = p == 0 ? dmax : -dmin;
  const double x_best = p == 0 ? xmax : xmin;
  PerturbationTemplate tmpl;
  double rho = 0.0;
  if (Dp_eta > 0.0) {
    tmpl = PerturbationTemplate::standard();
    rho = Dp_eta;
  } else {
    if (!(Dp_best > 0.0)) {
      throw ModelError("the used action never does strictly better: it is weakly dominated");
    }
    const double target = Dp_best / 2.0;
    const double w = (target - Dp_eta) / (Dp_best - Dp_eta);
    tmpl.components.push_back({point(x_best), w, 0.0});
    tmpl.components.push_back({std::nullopt, 1.0 - w, 0.0});
    rho = target;
  }
  const double need = -eps * rho / (1.0 - eps);
  double e2 = eps / 2.0;
  for (int i = 0; i < 200; ++i, e2 /= 2.0) {
    std::vector<double> s(2);
    s[p] = 1.0 - e2;
    s[q] = e2;
    if (sgn * D(s[0]) > need) {
      out.kind = "boundary";
      out.family = TemplateFamily::shared(std::move(tmpl));
      out.h_eps.h = {ActionDistribution(s)};
      out.rho = rho;
      return out;
    }
  }
  throw SolverError("no eps' keeps the used action ahead", {}, 0.0, {});
}

}  // namespace rpe
