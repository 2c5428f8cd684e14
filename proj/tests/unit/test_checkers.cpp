#include <gtest/gtest.h>

#include <cmath>

#include "rpe/checkers.hpp"
#include "rpe/errors.hpp"

using namespace rpe;

namespace {

const std::string kDir = RPE_FIXTURES;

GameFile game(const std::string& name) { return load_game(kDir + "/games/" + name + ".json"); }

TemplateFamily standard() { return TemplateFamily::shared(PerturbationTemplate::standard()); }

TemplateFamily certificate_family() {
  const std::vector<double> vw{0.5, 0, 0};
  return TemplateFamily::shared(PerturbationTemplate::vertex_mix(3, vw, 0.5));
}

}  // namespace

TEST(Nash, ThreePathFamily) {
  const auto f = game("three_path");
  for (double t : {0.0, 0.2, 0.5}) {
    const auto h = RandomizedProfile::symmetric(f.game, {5.0 / 6 - t, t, 1.0 / 6});
    EXPECT_TRUE(check_nash(f.game, h, 1e-9).passed()) << t;
  }
  const auto r = check_nash(f.game, RandomizedProfile::symmetric(f.game, {1, 0, 0}), 1e-9);
  EXPECT_FALSE(r.passed());
  ASSERT_FALSE(r.witnesses.empty());
  EXPECT_EQ(r.witnesses[0].action, "a");
  EXPECT_NEAR(*r.find_margin("max_regret"), 0.5 - 1.0 / 3, 1e-12);
}

TEST(Admissible, ThreePath) {
  const auto f = game("three_path");
  EXPECT_TRUE(check_admissible(f.game, f.named_profiles.at("g0")).passed());
  const auto r = check_admissible(f.game, f.named_profiles.at("b-sixth"));
  EXPECT_FALSE(r.passed());
  ASSERT_FALSE(r.witnesses.empty());
  EXPECT_EQ(r.witnesses[0].action, "b");
}

TEST(Admissible, MixedDominator) {
  // b is beaten by the even mixture of a and c everywhere but by neither alone.
  const auto g = parse_game(R"J({"actions": ["a", "b", "c"], "types": [{"id": "t", "mass": 1,
    "payoff": {"a": "2*tau(a)", "b": "0.9*tau(a) + 0.9*tau(c) - 0.1", "c": "2*tau(c)"}}]})J");
  const auto h = RandomizedProfile::symmetric(g.game, {0, 1, 0});
  const auto r = check_admissible(g.game, h);
  EXPECT_FALSE(r.passed());
  ASSERT_FALSE(r.witnesses.empty());
  EXPECT_EQ(r.witnesses[0].action, "b");
  ASSERT_EQ(r.witnesses[0].mixture.size(), 3u);
  EXPECT_GT(r.witnesses[0].mixture[0], 0.0);
  EXPECT_GT(r.witnesses[0].mixture[2], 0.0);
}

TEST(EpsRpe, ClosedFormPasses) {
  const auto f = game("three_path");
  for (double eps : {0.1, 1.0 / 60}) {
    const auto h = RandomizedProfile::symmetric(
        f.game, {(5 - 10 * eps + 6 * eps * eps) / (6 - 6 * eps), eps, (1 - 2 * eps) / (6 - 6 * eps)});
    EXPECT_TRUE(check_eps_rpe(f.game, h, eps, standard()).passed()) << eps;
  }
}

TEST(EpsRpe, CertificateFamilyPasses) {
  const auto f = game("three_path");
  const double e = 1.0 / 60;
  const auto h = RandomizedProfile::symmetric(f.game, {5.0 / 6 - e, e, 1.0 / 6});
  EXPECT_TRUE(check_eps_rpe(f.game, h, e, certificate_family()).passed());
}

TEST(EpsRpe, FailsOffEquilibrium) {
  const auto f = game("three_path");
  const auto h = RandomizedProfile::symmetric(f.game, {0.6, 0.2, 0.2});
  EXPECT_FALSE(check_eps_rpe(f.game, h, 0.1, standard()).passed());
  const auto low = RandomizedProfile::symmetric(f.game, {0.95, 0.01, 0.04});
  EXPECT_FALSE(check_eps_rpe(f.game, low, 0.1, standard()).passed());
}

TEST(EpsRpe, Preconditions) {
  const auto f = game("three_path");
  const auto h = RandomizedProfile::symmetric(f.game, ActionDistribution::uniform(3));
  const std::vector<double> vw{1, 0, 0};
  const auto no_eta = TemplateFamily::shared(PerturbationTemplate::vertex_mix(3, vw, 0.0));
  EXPECT_THROW(check_eps_rpe(f.game, h, 0.1, no_eta), PreconditionError);
  EpsRpeOptions o;
  o.rational_mass = 0.5;
  EXPECT_THROW(check_eps_rpe(f.game, h, 0.1, standard(), o), PreconditionError);
}

TEST(Certificate, ThreePath) {
  const auto f = game("three_path");
  EXPECT_TRUE(check_aggregate_robustness_certificate(f.game, f.named_profiles.at("g0"),
                                                     certificate_family())
                  .passed());
  EXPECT_FALSE(check_aggregate_robustness_certificate(f.game, f.named_profiles.at("g0"), standard())
                   .passed());
  const auto s = search_perturbation_certificate(f.game, f.named_profiles.at("g0"));
  ASSERT_TRUE(s.passed());
  ASSERT_FALSE(s.witnesses.empty());
}

TEST(Certificate, AttackFails) {
  const auto f = game("attack");
  const auto h = f.named_profiles.at("half-half-zero");
  EXPECT_TRUE(check_nash(f.game, h, 1e-9).passed());
  EXPECT_TRUE(check_admissible(f.game, h).passed());
  const auto s = search_perturbation_certificate(f.game, h);
  EXPECT_FALSE(s.passed());
  EXPECT_TRUE(s.find_margin("families_tried").has_value());
  PerturbedEvaluator ev(f.game);
  const auto probe = probe_joint_best_response(ev, 0, 0, 1, 0.0, 2000, 3);
  EXPECT_EQ(probe.trials, 2000u);
  EXPECT_EQ(probe.hits, 0u);
}

TEST(Certificate, AbcPerTypeFamily) {
  const auto f = game("abc_counterexample");
  TemplateFamily fam;
  for (std::size_t p = 0; p < 3; ++p) {
    PerturbationTemplate t;
    t.components.push_back({ActionDistribution::vertex(3, p), 1.0, -1.0});
    t.components.push_back({std::nullopt, 0.0, 1.0});
    fam.per_type.push_back(t);
  }
  const auto prof = f.named_profiles.at("f");
  EXPECT_TRUE(check_nash(f.game, prof, 1e-9).passed());
  EXPECT_TRUE(check_admissible(f.game, prof).passed());
  EXPECT_TRUE(check_aggregate_robustness_certificate(f.game, prof, fam).passed());
}

TEST(Potential, NetworksHavePotentials) {
  for (const char* name : {"pigou", "braess", "three_path"}) {
    const auto net = load_network(kDir + "/networks/" + std::string(name) + ".json");
    const auto g = as_large_game(net);
    EXPECT_TRUE(check_potential(g, negative_path_cost_exprs(net), 30, 1e-9).passed()) << name;
    EXPECT_TRUE(find_potential(g, 30, 1e-9).potential.has_value()) << name;
  }
}

TEST(Potential, TwoTypeGameHasNone) {
  const auto f = game("two_type_nonpotential");
  const auto s = find_potential(f.game, 30, 1e-9);
  EXPECT_FALSE(s.potential.has_value());
  EXPECT_FALSE(s.report.passed());
}

TEST(TwoPath, ModifiedPigouBoundary) {
  const auto f = game("modified_pigou");
  PerturbedEvaluator ev(f.game);
  const auto h = RandomizedProfile::symmetric(f.game, {1, 0});
  const auto c = two_path_construction(ev, h, 0.1);
  EXPECT_EQ(c.kind, "boundary");
  EXPECT_NEAR(c.rho, 0.125, 1e-9);
  EXPECT_NEAR(c.h_eps.h[0][0], 0.95, 1e-9);
  EXPECT_TRUE(check_eps_rpe(ev, c.h_eps, 0.1, c.family).passed());
}

TEST(Report, JsonCarriesVerdictAndMargins) {
  const auto f = game("three_path");
  const auto r = check_nash(f.game, RandomizedProfile::symmetric(f.game, {1, 0, 0}), 1e-9);
  const auto text = report_to_json(r);
  EXPECT_NE(text.find("\"verdict\""), std::string::npos);
  EXPECT_NE(text.find("max_regret"), std::string::npos);
  EXPECT_NE(text.find("fail"), std::string::npos);
}
