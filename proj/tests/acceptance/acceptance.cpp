// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "rpe/checkers.hpp"
#include "rpe/simulate.hpp"
#include "rpe/solvers.hpp"

using namespace rpe;

namespace {

const std::string kDir = RPE_FIXTURES;

struct Outcome {
  bool ok = true;
  std::string detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

TemplateFamily standard() { return TemplateFamily::shared(PerturbationTemplate::standard()); }

CongestionNetwork network(const std::string& name) {
  return load_network(kDir + "/networks/" + name + ".json");
}

GameFile game(const std::string& name) { return load_game(kDir + "/games/" + name + ".json"); }

// 1. Closed-form flows of the three-path network.
Outcome closed_form() {
  Outcome o;
  const auto net = network("three_path");
  for (double eps : {1.0 / 12, 1.0 / 60, 1.0 / 600}) {
    const auto t0 = Clock::now();
    const auto r = solve_beckmann(net, eps);
    const double dt = seconds_since(t0);
    const std::vector<double> want{(5 - 10 * eps + 6 * eps * eps) / (6 - 6 * eps), eps,
                                   (1 - 2 * eps) / (6 - 6 * eps)};
    const double err = linf_distance(r.flow.weights(), want);
    o.require(err <= 1e-6, "eps " + fmt("%g", eps) + " error " + fmt("%.3g", err));
    o.require(dt < 1.0, "eps " + fmt("%g", eps) + " took " + fmt("%.3g", dt) + " s");
  }
  return o;
}

// 2. Limit of the eps-RPE flows and the checks on it.
Outcome rpe_limit_three_path() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto net = network("three_path");
  const auto lim = rpe_limit(net, EpsSchedule::sixth(1, 200));
  const std::vector<double> want{5.0 / 6, 0, 1.0 / 6};
  const double err = linf_distance(lim.limit.weights(), want);
  o.require(err <= 1e-3, "limit error " + fmt("%.3g", err));
  const auto g = as_large_game(net);
  const auto h = RandomizedProfile::symmetric(g, lim.limit);
  o.require(check_nash(g, h, 1e-7).passed(), "limit fails check_nash");
  o.require(check_admissible(g, h).passed(), "limit fails check_admissible");
  // The limit has an unused path, so the eps condition is checked on the
  // last full-support iterate.
  const double eps_last = lim.trajectory.back().eps;
  const auto h_last = RandomizedProfile::symmetric(g, lim.final_iterate);
  o.require(check_eps_rpe(g, h_last, eps_last, standard()).passed(),
            "final iterate fails check_eps_rpe");
  const std::vector<double> vw{0.5, 0, 0};
  const auto fam = TemplateFamily::shared(PerturbationTemplate::vertex_mix(3, vw, 0.5));
  o.require(check_aggregate_robustness_certificate(g, h, fam).passed(),
            "limit fails the certificate");
  o.require(search_perturbation_certificate(g, h).passed(), "certificate search fails");
  const double dt = seconds_since(t0);
  o.require(dt < 30.0, "took " + fmt("%.3g", dt) + " s");
  return o;
}

// 3. Modified Pigou limit and the dominance of path b.
Outcome modified_pigou() {
  Outcome o;
  const auto net = network("modified_pigou");
  const auto lim = rpe_limit(net, EpsSchedule::sixth(1, 200));
  const std::vector<double> want{1, 0};
  const std::size_t a = net.path_index("a");
  const std::size_t b = net.path_index("b");
  std::vector<double> w(2);
  w[a] = 1;
  w[b] = 0;
  const double err = linf_distance(lim.limit.weights(), w);
  o.require(err <= 1e-3, "limit error " + fmt("%.3g", err));
  const auto g = as_large_game(net);
  for (int i = 1; i <= 100; ++i) {
    std::vector<double> x(2);
    x[b] = i / 100.0;
    x[a] = 1.0 - x[b];
    const auto r = check_admissible(g, RandomizedProfile::symmetric(g, ActionDistribution(x)));
    bool witness = false;
    for (const auto& wit : r.witnesses) {
      if (wit.action != "b") continue;
      if (wit.other == "a") witness = true;
      if (wit.mixture.size() == 2 && std::abs(wit.mixture[a] - 1.0) < 1e-9) witness = true;
    }
    if (r.passed() || !witness) {
      o.require(false, "weight " + fmt("%g", x[b]) + " on b not rejected with witness a");
      break;
    }
  }
  return o;
}

// 4. Grid enumeration of the Nash flows of the three-path game.
Outcome nash_family() {
  Outcome o;
  const auto g = game("three_path");
  // The 1/100 grid misses tau(c) = 1/6, so the line tau(c) = 1/6 is added at
  // the same tau(b) spacing.
  auto points = simplex_grid(3, 100);
  for (int i = 0; i <= 83; ++i) {
    const double tb = i / 100.0;
    points.push_back(ActionDistribution{5.0 / 6 - tb, tb, 1.0 / 6});
  }
  std::size_t accepted = 0;
  std::size_t expected = 0;
  std::size_t mismatches = 0;
  for (const auto& p : points) {
    const bool oracle = std::abs(p[2] - 1.0 / 6) <= 1e-6 && p[1] <= 0.5 + 1e-6;
    const bool got = check_nash(g.game, RandomizedProfile::symmetric(g.game, p), 1e-9).passed();
    accepted += got;
    expected += oracle;
    mismatches += got != oracle;
  }
  o.require(mismatches == 0, fmt("%g mismatches", double(mismatches)));
  o.require(expected == 51 && accepted == 51, fmt("%g accepted", double(accepted)));
  return o;
}

LargeGame attack_game(double t1, double t2) {
  const std::string text =
      R"J({"actions": ["a", "b", "c"], "types": [{"id": "agents", "mass": 1, "payoff": {"a": ")J" +
      fmt("%.17g", t1) + R"J( * (tau(a) - 1/2)", "b": ")J" + fmt("%.17g", t2) +
      R"J( * (tau(b) - 1/2)", "c": "0"}}]})J";
  return parse_game(text).game;
}

// 5. Attack game: no certificate and no joint best response.
Outcome attack() {
  Outcome o;
  const auto g = game("attack");
  const auto s0 = g.named_profiles.at("half-half-zero");
  o.require(check_nash(g.game, s0, 1e-9).passed(), "check_nash fails");
  o.require(check_admissible(g.game, s0).passed(), "check_admissible fails");
  o.require(!search_perturbation_certificate(g.game, s0).passed(), "a certificate was found");
  const std::vector<std::pair<double, double>> thetas{{0.8, 0.4}, {0.5, 0.9}, {1.0, 1.0}};
  for (const auto& [t1, t2] : thetas) {
    const auto ag = attack_game(t1, t2);
    PerturbedEvaluator ev(ag);
    const auto pr = probe_joint_best_response(ev, 0, 0, 1, 0.0, 1000, 11, 1e-9);
    o.require(pr.trials == 1000 && pr.hits == 0,
              "theta (" + fmt("%g", t1) + "," + fmt("%g", t2) + ") has joint best responses");
  }
  return o;
}

// 6. The counterexample profile is certified but no eps-RPE sits near it.
Outcome counterexample() {
  Outcome o;
  const auto g = game("abc_counterexample");
  const auto f = g.named_profiles.at("f");
  o.require(check_nash(g.game, f, 1e-9).passed(), "check_nash fails");
  o.require(check_admissible(g.game, f).passed(), "check_admissible fails");
  TemplateFamily fam;
  for (std::size_t p = 0; p < 3; ++p) {
    PerturbationTemplate t;
    t.components.push_back({ActionDistribution::vertex(3, p), 1.0, -1.0});
    t.components.push_back({std::nullopt, 0.0, 1.0});
    fam.per_type.push_back(t);
  }
  o.require(check_aggregate_robustness_certificate(g.game, f, fam).passed(),
            "per-type certificate fails");
  const ActionDistribution center = ActionDistribution::uniform(3);
  for (const bool from_f : {true, false}) {
    for (double eps : {1.0 / 10, 1.0 / 20, 1.0 / 40, 1.0 / 80}) {
      FixedPointOptions fo;
      if (from_f) fo.start = f;
      const auto fp = fixed_point_eps_rpe(g.game, eps, standard(), fo);
      const double mn = fp.summary.min_weight();
      o.require(mn <= 3 * eps, "eps " + fmt("%g", eps) + " min coordinate " + fmt("%.3g", mn));
      if (eps <= 1.0 / 40) {
        const double d = linf_distance(fp.summary.weights(), center.weights());
        o.require(d > 0.05, "eps " + fmt("%g", eps) + " summary within 0.05 of the centre");
      }
    }
  }
  return o;
}

// 7. KKT verification and its sensitivity.
Outcome kkt() {
  Outcome o;
  for (const char* name : {"pigou", "modified_pigou", "braess", "three_path"}) {
    const auto net = network(name);
    for (double eps : {1.0 / 12, 1.0 / 60}) {
      const auto r = solve_beckmann(net, eps);
      const auto k = verify_kkt(net, eps, r.flow, 1e-6);
      const std::string tag = std::string(name) + " eps " + fmt("%g", eps);
      o.require(k.verdict == KktReport::Verdict::Pass && k.max_residual <= 1e-6,
                tag + " residual " + fmt("%.3g", k.max_residual));
      auto x = r.flow.vec();
      const auto big = std::max_element(x.begin(), x.end()) - x.begin();
      x[big] -= 0.05;
      const auto moved = project_truncated(x, eps);
      const auto k2 = verify_kkt(net, eps, moved, 1e-6);
      o.require(k2.verdict != KktReport::Verdict::Pass, tag + " perturbed flow still passes");
    }
  }
  return o;
}

// 8. Uniqueness when every cost is strictly increasing.
Outcome strict_uniqueness() {
  Outcome o;
  const auto net = parse_network(R"J({"nodes": ["o", "t"], "origin": "o", "destination": "t",
    "edges": [{"id": "a", "from": "o", "to": "t", "cost": "1/2 + x/100"},
              {"id": "b", "from": "o", "to": "t", "cost": "max(x, 1/2 + x/100)"},
              {"id": "c", "from": "o", "to": "t", "cost": "x + 1/3"}]})J");
  o.require(net.all_strictly_increasing(), "variant costs are not strictly increasing");
  Rng rng(20240611);
  for (double eps : {0.0, 1.0 / 60}) {
    std::vector<ActionDistribution> sols;
    for (int i = 0; i < 10; ++i) {
      std::vector<double> start(3);
      double s = 0;
      for (auto& v : start) s += (v = rng.exponential());
      for (auto& v : start) v /= s;
      BeckmannOptions bo;
      bo.start = project_truncated(start, eps).vec();
      sols.push_back(solve_beckmann(net, eps, bo).flow);
    }
    double spread = 0;
    for (const auto& x : sols) spread = std::max(spread, linf_distance(x.weights(), sols[0].weights()));
    o.require(spread <= 1e-6, "eps " + fmt("%g", eps) + " spread " + fmt("%.3g", spread));
  }
  const auto lim = rpe_limit(net, EpsSchedule::sixth(1, 200));
  o.require(lim.cauchy_residual < 1e-4, "Cauchy residual " + fmt("%.3g", lim.cauchy_residual));
  o.require(lim.unique_limit, "limit not flagged unique");
  return o;
}

// 9. Explicit perturbations for the two-path networks.
Outcome two_path() {
  Outcome o;
  for (const char* name : {"pigou", "modified_pigou"}) {
    const auto net = network(name);
    const auto g = as_large_game(net);
    PerturbedEvaluator ev(g);
    std::size_t found = 0;
    for (const auto& p : simplex_grid(2, 200)) {
      const auto h = RandomizedProfile::symmetric(g, p);
      if (!check_nash(g, h, 1e-9).passed() || !check_admissible(g, h).passed()) continue;
      ++found;
      for (double eps : {0.1, 0.01}) {
        const auto c = two_path_construction(ev, h, eps);
        o.require(check_eps_rpe(ev, c.h_eps, eps, c.family).passed(),
                  std::string(name) + " eps " + fmt("%g", eps) + " construction fails");
      }
    }
    o.require(found > 0, std::string(name) + " has no admissible Nash equilibrium on the grid");
  }
  return o;
}

// 10. Empirical law of large numbers.
Outcome elln() {
  Outcome o;
  const auto t0 = Clock::now();
  const auto g = game("three_path");
  const auto rep = elln_report(g.game, g.named_profiles.at("g0"), {1000, 10000, 100000, 1000000},
                               20, 1);
  const double dt = seconds_since(t0);
  o.require(rep.slope >= -0.6 && rep.slope <= -0.4, "slope " + fmt("%.3g", rep.slope));
  o.require(rep.mean_error.back() < 2e-3, "error at 1e6 " + fmt("%.3g", rep.mean_error.back()));
  o.require(dt < 60.0, "took " + fmt("%.3g", dt) + " s");
  return o;
}

// 11. Beta quadrature against the closed form and Monte Carlo.
Outcome quadrature() {
  Outcome o;
  const auto c = [](double x) { return std::max(x, 0.5); };
  const std::vector<double> bp{0.5};
  const double v = beta_marginal_expectation(c, 1, 3, kDefaultQuadratureNodes, bp);
  o.require(std::abs(v - 13.0 / 24) <= 1e-9, "quadrature " + fmt("%.12g", v));
  const auto s = uniform_samples(3, 1000000, 20240611);
  double mc = 0;
  for (const auto& p : s) mc += c(p[0]);
  mc /= static_cast<double>(s.size());
  o.require(std::abs(v - mc) <= 1e-3, "Monte Carlo " + fmt("%.6g", mc));
  return o;
}

// 12. Potentials.
Outcome potential() {
  Outcome o;
  for (const char* name : {"pigou", "modified_pigou", "braess", "three_path"}) {
    const auto net = network(name);
    const auto g = as_large_game(net);
    o.require(check_potential(g, negative_path_cost_exprs(net), 30, 1e-9).passed(),
              std::string(name) + " fails check_potential");
  }
  const auto np = game("two_type_nonpotential");
  o.require(!find_potential(np.game, 30, 1e-9).potential.has_value(),
            "a potential was found for the two-type game");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"closed-form eps-RPE flows on three_path", closed_form},
      {"RPE limit on three_path passes all checks", rpe_limit_three_path},
      {"modified Pigou limit and dominated path b", modified_pigou},
      {"Nash family on the three-path grid", nash_family},
      {"attack game has no perturbation certificate", attack},
      {"counterexample f is not an RPE", counterexample},
      {"KKT verification and sensitivity", kkt},
      {"uniqueness under strictly increasing costs", strict_uniqueness},
      {"two-path construction on Pigou networks", two_path},
      {"empirical law of large numbers", elln},
      {"Beta-marginal quadrature", quadrature},
      {"potential on networks, none for two-type game", potential},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.ok;
    std::printf("%s %2zu %s (%.2f s)%s%s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first,
                seconds_since(t0), o.detail.empty() ? "" : ": ", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
