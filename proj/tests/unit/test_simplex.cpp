#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rpe/errors.hpp"
#include "rpe/simplex.hpp"

using namespace rpe;

TEST(ActionDistribution, RejectsNegativeAndBadSum) {
  EXPECT_THROW(ActionDistribution({0.5, 0.6}), PreconditionError);
  EXPECT_THROW(ActionDistribution({1.1, -0.1}), PreconditionError);
  EXPECT_NO_THROW(ActionDistribution({0.25, 0.75}));
  EXPECT_EQ(ActionDistribution::vertex(3, 1).vec(), (std::vector<double>{0, 1, 0}));
  EXPECT_TRUE(ActionDistribution::uniform(4).full_support());
  EXPECT_FALSE(ActionDistribution::vertex(2, 0).full_support());
}

TEST(TruncatedSimplex, RejectsEmptySet) {
  EXPECT_THROW(TruncatedSimplex(3, 0.5), PreconditionError);
  EXPECT_THROW(TruncatedSimplex(3, -0.1), PreconditionError);
  TruncatedSimplex s(3, 0.1);
  EXPECT_TRUE(s.contains(std::vector<double>{0.8, 0.1, 0.1}));
  EXPECT_FALSE(s.contains(std::vector<double>{0.85, 0.05, 0.1}));
}

TEST(Projection, FeasiblePointIsFixed) {
  const std::vector<double> x{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const auto y = project_truncated(x, 0.0);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(y[k], 1.0 / 3, 1e-15);
}

TEST(Projection, VertexWithFloor) {
  const auto y = project_truncated(std::vector<double>{1, 0, 0}, 0.1);
  EXPECT_NEAR(y[0], 0.8, 1e-15);
  EXPECT_NEAR(y[1], 0.1, 1e-15);
  EXPECT_NEAR(y[2], 0.1, 1e-15);
}

// Brute-force oracle: minimize the squared distance over a fine grid of the
// truncated simplex.
TEST(Projection, MatchesGridSearch) {
  const std::vector<double> x{1, 0, 0};
  const double floor = 0.1;
  double best = 1e9;
  std::vector<double> arg;
  const int M = 1000;
  for (int i = 0; i <= M; ++i) {
    for (int j = 0; i + j <= M; ++j) {
      std::vector<double> y{i / double(M), j / double(M), (M - i - j) / double(M)};
      if (*std::min_element(y.begin(), y.end()) < floor - 1e-12) continue;
      double d = 0;
      for (int k = 0; k < 3; ++k) d += (y[k] - x[k]) * (y[k] - x[k]);
      if (d < best) best = d, arg = y;
    }
  }
  const auto p = project_truncated(x, floor);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(p[k], arg[k], 2e-3);
}

TEST(Projection, ShiftInvariant) {
  const std::vector<double> x{0.9, 0.6, -0.5};
  const std::vector<double> shifted{1.9, 1.6, 0.5};
  const auto a = project_truncated(x, 0.0);
  const auto b = project_truncated(shifted, 0.0);
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(a[k], b[k], 1e-14);
}

TEST(Projection, RejectsBadFloor) {
  EXPECT_THROW(project_truncated(std::vector<double>{1, 0}, 0.6), PreconditionError);
  EXPECT_THROW(project_truncated(std::vector<double>{1, 0}, -0.1), PreconditionError);
}

TEST(Projection, IdempotentAndOptimal) {
  Rng rng(5);
  const auto grid = simplex_grid(3, 40);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> x(3);
    for (auto& v : x) v = 4.0 * rng.uniform() - 2.0;
    const double floor = 0.05;
    const auto p = project_truncated(x, floor);
    TruncatedSimplex S(3, floor);
    ASSERT_TRUE(S.contains(p.weights()));
    const auto pp = project_truncated(p.weights(), floor);
    EXPECT_LE(linf_distance(p.weights(), pp.weights()), 1e-10);
    double dp = 0;
    for (int k = 0; k < 3; ++k) dp += (p[k] - x[k]) * (p[k] - x[k]);
    for (const auto& y : grid) {
      if (y.min_weight() < floor) continue;
      double dy = 0;
      for (int k = 0; k < 3; ++k) dy += (y[k] - x[k]) * (y[k] - x[k]);
      ASSERT_LE(dp, dy + 1e-12);
    }
  }
}

TEST(UniformSamples, MeanIsCentroid) {
  const auto s = uniform_samples(3, 1000000, 11);
  std::vector<double> mean(3, 0.0);
  for (const auto& p : s) {
    for (int k = 0; k < 3; ++k) mean[k] += p[k];
  }
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(mean[k] / s.size(), 1.0 / 3, 0.002);
}

TEST(UniformSamples, TwoActionMarginalIsUniform) {
  const std::size_t n = 1000000;
  const auto s = uniform_samples(2, n, 3);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = s[i][0];
  std::sort(x.begin(), x.end());
  double ks = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ks = std::max(ks, std::max(std::abs(x[i] - double(i) / n), std::abs(x[i] - double(i + 1) / n)));
  }
  EXPECT_LT(ks, 0.005);
}

TEST(UniformSamples, Deterministic) {
  const auto a = uniform_samples(4, 100, 99);
  const auto b = uniform_samples(4, 100, 99);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, uniform_samples(4, 100, 100));
}

TEST(UniformSamples, ErrorHalvesWhenSampleQuadruples) {
  auto err = [](std::size_t n) {
    double total = 0;
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
      const auto s = uniform_samples(3, n, 1000 + seed);
      double m = 0;
      for (const auto& p : s) m += p[0];
      total += std::abs(m / n - 1.0 / 3);
    }
    return total / 40;
  };
  const double ratio = err(4000) / err(16000);
  EXPECT_GT(ratio, 2.0 * 0.7);
  EXPECT_LT(ratio, 2.0 * 1.3);
}

TEST(BetaMarginal, AnalyticValues) {
  EXPECT_NEAR(beta_marginal_expectation([](double x) { return x; }, 1, 3), 1.0 / 3, 1e-12);
  for (std::size_t K = 2; K < 6; ++K) {
    for (std::size_t k = 1; k < K; ++k) {
      EXPECT_NEAR(beta_marginal_expectation([](double) { return 0.5; }, k, K), 0.5, 1e-12);
    }
  }
  // Integral of max(x, 1/2) * 2 (1 - x) over [0, 1].
  const double v = beta_marginal_expectation([](double x) { return std::max(x, 0.5); }, 1, 3,
                                             64, std::vector<double>{0.5});
  EXPECT_NEAR(v, 13.0 / 24, 1e-12);
  EXPECT_THROW(beta_marginal_expectation([](double x) { return x; }, 3, 3), PreconditionError);
}

TEST(BetaMarginal, AgreesWithMonteCarlo) {
  const std::size_t n = 200000;
  const auto s = uniform_samples(4, n, 17);
  const std::vector<std::function<double(double)>> fs{
      [](double x) { return x * x - 0.3 * x; },
      [](double x) { return x < 0.4 ? 2 * x : 0.8 - (x - 0.4); },
      [](double x) { return std::max(x, 0.6); }};
  const std::vector<std::vector<double>> bps{{}, {0.4}, {0.6}};
  for (std::size_t i = 0; i < fs.size(); ++i) {
    double m = 0, m2 = 0;
    for (const auto& p : s) {
      const double v = fs[i](p[0] + p[2]);
      m += v;
      m2 += v * v;
    }
    m /= n;
    const double sd = std::sqrt(m2 / n - m * m);
    const double exact = beta_marginal_expectation(fs[i], 2, 4, 64, bps[i]);
    EXPECT_LE(std::abs(exact - m), 3 * sd / std::sqrt(double(n))) << i;
  }
}

TEST(SimplexGrid, Counts) {
  const auto g = simplex_grid(2, 2);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_EQ(g[0].vec(), (std::vector<double>{0, 1}));
  EXPECT_EQ(g[1].vec(), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(g[2].vec(), (std::vector<double>{1, 0}));
  EXPECT_EQ(simplex_grid(3, 2).size(), 6u);
  const auto g10 = simplex_grid(3, 10);
  EXPECT_EQ(g10.size(), binomial(12, 2));
  EXPECT_EQ(g10.size(), 66u);
}

TEST(GaussLegendre, ExactForPolynomials) {
  GaussLegendre gl(8);
  EXPECT_NEAR(gl.integrate([](double x) { return std::pow(x, 15); }, 0, 1), 1.0 / 16, 1e-14);
  EXPECT_NEAR(gl.integrate_piecewise([](double x) { return std::abs(x - 0.3); }, 0, 1,
                                     std::vector<double>{0.3}),
              0.045 + 0.245, 1e-14);
}
