#include <gtest/gtest.h>

#include <cmath>

#include "rpe/errors.hpp"
#include "rpe/solvers.hpp"

using namespace rpe;

namespace {

const std::string kDir = RPE_FIXTURES;

CongestionNetwork net(const std::string& name) {
  return load_network(kDir + "/networks/" + name + ".json");
}

}  // namespace

TEST(Schedule, Validation) {
  const auto s = EpsSchedule::sixth(1, 5);
  EXPECT_EQ(s.size(), 5u);
  EXPECT_NEAR(s.eps[0], 1.0 / 6, 1e-15);
  EXPECT_NO_THROW(s.validate(1.0 / 3));
  EXPECT_THROW(s.validate(0.1), PreconditionError);
  EXPECT_THROW(EpsSchedule::from_values({0.1, 0.1}).validate(), PreconditionError);
  EXPECT_THROW(EpsSchedule::from_values({0.1, -0.1}).validate(), PreconditionError);
}

TEST(Beckmann, ThreePathClosedForm) {
  const auto n = net("three_path");
  for (double eps : {1.0 / 12, 1.0 / 60, 1.0 / 600}) {
    const auto r = solve_beckmann(n, eps);
    EXPECT_NEAR(r.flow[0], (5 - 10 * eps + 6 * eps * eps) / (6 - 6 * eps), 1e-9);
    EXPECT_NEAR(r.flow[1], eps, 1e-9);
    EXPECT_NEAR(r.flow[2], (1 - 2 * eps) / (6 - 6 * eps), 1e-9);
    EXPECT_EQ(verify_kkt(n, eps, r.flow, 1e-9).verdict, KktReport::Verdict::Pass);
  }
}

// Oracle: brute-force minimization of the perturbed Beckmann objective for
// Pigou on a fine grid of the flow on the linear edge.
TEST(Beckmann, PigouMatchesGridOracle) {
  const auto n = net("pigou");
  const double eps = 0.01;
  double best = 1e9;
  double arg = 0;
  for (int i = 0; i <= 100000; ++i) {
    const double x = eps + (1 - 2 * eps) * i / 100000.0;
    // Integral of (1 - eps) y + eps/2 over [0, x], plus the constant edge.
    const double f = (1 - eps) * x * x / 2 + eps * 0.5 * x + (1 - x);
    if (f < best) best = f, arg = x;
  }
  const auto r = solve_beckmann(n, eps);
  EXPECT_NEAR(r.flow[0], arg, 1e-4);
  EXPECT_NEAR(r.objective, best, 1e-8);
}

TEST(Beckmann, IdenticalEdgesSplitEvenly) {
  const auto n = parse_network(R"({"nodes": ["o", "t"], "origin": "o", "destination": "t",
    "edges": [{"id": "a", "from": "o", "to": "t", "cost": "2*x + 1"},
              {"id": "b", "from": "o", "to": "t", "cost": "2*x + 1"}]})");
  for (double eps : {0.0, 0.1}) {
    const auto r = solve_beckmann(n, eps);
    EXPECT_NEAR(r.flow[0], 0.5, 1e-9);
    EXPECT_NEAR(r.flow[1], 0.5, 1e-9);
  }
}

TEST(Beckmann, BadEpsRejected) {
  EXPECT_THROW(solve_beckmann(net("pigou"), 0.6), PreconditionError);
}

TEST(Beckmann, IterationCapRaisesSolverError) {
  BeckmannOptions o;
  o.max_iters = 0;
  o.start = std::vector<double>{0.5, 0.3, 0.2};
  try {
    solve_beckmann(net("three_path"), 0.01, o);
    FAIL();
  } catch (const SolverError& e) {
    EXPECT_EQ(e.best_iterate().size(), 3u);
  }
}

TEST(Kkt, DetectsNonEquilibrium) {
  const auto n = net("three_path");
  const double eps = 0.05;
  const ActionDistribution uniform = ActionDistribution::uniform(3);
  const auto k = verify_kkt(n, eps, uniform, 1e-9);
  EXPECT_EQ(k.verdict, KktReport::Verdict::Fail);
  EXPECT_GT(k.max_residual, 1e-3);
  const ActionDistribution below{0.99, 0.005, 0.005};
  EXPECT_THROW(verify_kkt(n, eps, below, 1e-9), PreconditionError);
}

TEST(RpeLimit, ThreePath) {
  const auto r = rpe_limit(net("three_path"), EpsSchedule::sixth(1, 200));
  EXPECT_NEAR(r.limit[0], 5.0 / 6, 1e-6);
  EXPECT_NEAR(r.limit[1], 0.0, 1e-6);
  EXPECT_NEAR(r.limit[2], 1.0 / 6, 1e-6);
  EXPECT_LT(r.cauchy_residual, 1e-4);
  EXPECT_EQ(r.trajectory.size(), 200u);
}

TEST(Extrapolation, RecoversPolynomial) {
  std::vector<double> e{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> v;
  for (double x : e) v.push_back(2 - 3 * x + x * x);
  EXPECT_NEAR(extrapolate_to_zero(e, v), 2, 1e-12);
}

TEST(FixedPoint, ThreePathGameMatchesFlow) {
  const auto g = load_game(kDir + "/games/three_path.json");
  const double eps = 1.0 / 60;
  const auto fp = fixed_point_eps_rpe(g.game, eps, TemplateFamily::shared(PerturbationTemplate::standard()));
  EXPECT_LT(fp.residual, 1e-9);
  // Nobody picks b, so it keeps only its tremble eps/3; c is pinned by the
  // indifference with a, as in the network version.
  const double c = (1 - 2 * eps) / (6 - 6 * eps);
  EXPECT_NEAR(fp.summary[1], eps / 3, 1e-7);
  EXPECT_NEAR(fp.summary[2], c, 1e-7);
  EXPECT_NEAR(fp.summary[0], 1 - eps / 3 - c, 1e-7);
}

TEST(FixedPoint, GameLimit) {
  const auto g = load_game(kDir + "/games/three_path.json");
  const auto r = rpe_limit_game(g.game, EpsSchedule::sixth(1, 200),
                                TemplateFamily::shared(PerturbationTemplate::standard()));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.limit_summary[0], 5.0 / 6, 1e-4);
  EXPECT_NEAR(r.limit_summary[2], 1.0 / 6, 1e-4);
}

TEST(Poa, PigouAndThreePath) {
  const auto p = price_of_anarchy(net("pigou"));
  EXPECT_NEAR(p.ratio, 4.0 / 3, 1e-6);
  const auto t = price_of_anarchy(net("three_path"));
  EXPECT_NEAR(t.optimum_cost, 71.0 / 144, 1e-6);
  EXPECT_NEAR(t.ratio, 72.0 / 71, 1e-6);
  const auto b = price_of_anarchy(net("braess"));
  EXPECT_NEAR(b.equilibrium_cost, 2.0, 1e-6);
  EXPECT_NEAR(b.optimum_cost, 1.5, 1e-6);
}
