#include "rpe/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>

#include "rpe/errors.hpp"

namespace rpe {

ActionDistribution::ActionDistribution(std::vector<double> weights)
    : weights_(std::move(weights)) {
  if (weights_.empty()) {
    throw PreconditionError("ActionDistribution: empty weight vector");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const double w = weights_[k];
    if (!std::isfinite(w) || w < 0.0) {
      throw PreconditionError("ActionDistribution: weight " + std::to_string(k) +
                              " is negative or not finite");
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > kSimplexSumTol) {
    throw PreconditionError("ActionDistribution: weights sum to " +
                            std::to_string(sum) + ", expected 1");
  }
}

ActionDistribution ActionDistribution::vertex(std::size_t K, std::size_t k) {
  if (k >= K) throw PreconditionError("vertex index out of range");
  std::vector<double> w(K, 0.0);
  w[k] = 1.0;
  return ActionDistribution(std::move(w));
}

ActionDistribution ActionDistribution::uniform(std::size_t K) {
  if (K == 0) throw PreconditionError("uniform distribution needs K >= 1");
  std::vector<double> w(K, 1.0 / static_cast<double>(K));
  // Push the rounding residue into the last coordinate.
  double head = 0.0;
  for (std::size_t k = 0; k + 1 < K; ++k) head += w[k];
  w[K - 1] = 1.0 - head;
  return ActionDistribution(std::move(w));
}

double ActionDistribution::min_weight() const {
  return *std::min_element(weights_.begin(), weights_.end());
}

ActionDistribution mix(std::span<const ActionDistribution> points,
                       std::span<const double> coeffs) {
  if (points.empty() || points.size() != coeffs.size()) {
    throw PreconditionError("mix: points and coefficients differ in length");
  }
  const std::size_t K = points.front().size();
  std::vector<double> out(K, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != K) {
      throw PreconditionError("mix: points of different dimension");
    }
    for (std::size_t k = 0; k < K; ++k) out[k] += coeffs[i] * points[i][k];
  }
  for (double& w : out) w = std::max(w, 0.0);
  return ActionDistribution(std::move(out));
}

double linf_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw PreconditionError("linf_distance: dimension mismatch");
  }
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) d = std::max(d, std::abs(x[k] - y[k]));
  return d;
}

TruncatedSimplex::TruncatedSimplex(std::size_t K, double floor)
    : K_(K), floor_(floor) {
  if (K == 0) throw PreconditionError("TruncatedSimplex: K must be positive");
  if (!(floor >= 0.0) || static_cast<double>(K) * floor > 1.0 + kSimplexSumTol) {
    throw PreconditionError("TruncatedSimplex: floor must lie in [0, 1/K]");
  }
}

bool TruncatedSimplex::contains(std::span<const double> x) const {
  if (x.size() != K_) return false;
  double sum = 0.0;
  for (double v : x) {
    if (v < floor_ - 1e-12) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= kSimplexSumTol;
}

ActionDistribution project_truncated(std::span<const double> x, double floor) {
  const std::size_t K = x.size();
  if (K == 0) throw PreconditionError("project_truncated: empty input");
  if (!(floor >= 0.0) || static_cast<double>(K) * floor > 1.0 + kSimplexSumTol) {
    throw PreconditionError("project_truncated: floor must lie in [0, 1/K]");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw PreconditionError("project_truncated: non-finite input");
  }
  const double radius = std::max(0.0, 1.0 - static_cast<double>(K) * floor);
  std::vector<double> out(K, floor);
  if (radius == 0.0) {
    return ActionDistribution(std::move(out));
  }

  // Project z = x - floor onto {z >= 0, sum z = radius}.
  std::vector<double> sorted(K);
  for (std::size_t k = 0; k < K; ++k) sorted[k] = x[k] - floor;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < K; ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    if (sorted[j] - candidate > 0.0) theta = candidate;
  }
  for (std::size_t k = 0; k < K; ++k) {
    out[k] = floor + std::max(x[k] - floor - theta, 0.0);
  }

  // Remove the rounding residue from the largest coordinate so the output
  // satisfies the unit-sum invariant to machine precision.
  const double sum = std::accumulate(out.begin(), out.end(), 0.0);
  auto largest = std::max_element(out.begin(), out.end());
  *largest = std::max(floor, *largest - (sum - 1.0));
  return ActionDistribution(std::move(out));
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

std::uint64_t Rng::next_u64() { return engine_(); }

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::exponential() { return -std::log1p(-uniform()); }

std::vector<ActionDistribution> uniform_samples(std::size_t K, std::size_t n,
                                                std::uint64_t seed) {
  if (K < 2) throw PreconditionError("uniform_samples: K must be at least 2");
  if (n < 1) throw PreconditionError("uniform_samples: n must be at least 1");
  Rng rng(seed);
  std::vector<ActionDistribution> out;
  out.reserve(n);
  std::vector<double> w(K);
  for (std::size_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      w[k] = rng.exponential();
      total += w[k];
    }
    double head = 0.0;
    for (std::size_t k = 0; k + 1 < K; ++k) {
      w[k] /= total;
      head += w[k];
    }
    w[K - 1] = std::max(0.0, 1.0 - head);
    out.emplace_back(w);
  }
  return out;
}

GaussLegendre::GaussLegendre(std::size_t n) : nodes(n), weights(n) {
  if (n == 0) throw PreconditionError("GaussLegendre: need at least one node");
  // Newton iteration on P_n from the Chebyshev-like initial guesses.
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t j = 2; j <= n; ++j) {
        const double jd = static_cast<double>(j);
        const double p2 = ((2.0 * jd - 1.0) * x * p1 - (jd - 1.0) * p0) / jd;
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

double GaussLegendre::integrate(const std::function<double(double)>& f,
                                double a, double b) const {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    sum += weights[i] * f(mid + half * nodes[i]);
  }
  return half * sum;
}

double GaussLegendre::integrate_piecewise(const std::function<double(double)>& f,
                                          double a, double b,
                                          std::span<const double> breakpoints) const {
  std::vector<double> cuts{a};
  for (double c : breakpoints) {
    if (c > a && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    sum += integrate(f, cuts[i], cuts[i + 1]);
  }
  return sum;
}

const GaussLegendre& default_quadrature() {
  static const GaussLegendre rule(kDefaultQuadratureNodes);
  return rule;
}

double beta_density(double x, std::size_t k, std::size_t K) {
  if (k < 1 || k >= K) {
    throw PreconditionError("beta_density: need 1 <= k < K");
  }
  if (x < 0.0 || x > 1.0) return 0.0;
  const double a = static_cast<double>(k);
  const double b = static_cast<double>(K - k);
  const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  // Integer shape parameters: the density is a polynomial, evaluate directly.
  return std::exp(log_norm) * std::pow(x, a - 1.0) * std::pow(1.0 - x, b - 1.0);
}

double beta_marginal_expectation(const std::function<double(double)>& c,
                                 std::size_t k, std::size_t K, std::size_t nodes,
                                 std::span<const double> breakpoints) {
  if (k == K) {
    throw PreconditionError(
        "beta_marginal_expectation: k = K means the sum is identically 1; "
        "evaluate c(1) directly");
  }
  if (k < 1 || k > K) {
    throw PreconditionError("beta_marginal_expectation: need 1 <= k < K");
  }
  std::optional<GaussLegendre> custom;
  if (nodes != kDefaultQuadratureNodes) custom.emplace(nodes);
  const GaussLegendre& rule = custom ? *custom : default_quadrature();
  return rule.integrate_piecewise(
      [&](double x) { return c(x) * beta_density(x, k, K); }, 0.0, 1.0,
      breakpoints);
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    result = result * (n - r + i) / i;
  }
  return result;
}

namespace {

void grid_recurse(std::size_t K, std::size_t m, std::size_t remaining,
                  std::vector<std::size_t>& counts,
                  std::vector<ActionDistribution>& out) {
  const std::size_t k = counts.size();
  if (k + 1 == K) {
    counts.push_back(remaining);
    std::vector<double> w(K);
    for (std::size_t j = 0; j < K; ++j) {
      w[j] = static_cast<double>(counts[j]) / static_cast<double>(m);
    }
    counts.pop_back();
    // Exact multiples of 1/m can still miss the unit sum by an ulp.
    double head = 0.0;
    for (std::size_t j = 0; j + 1 < K; ++j) head += w[j];
    if (std::abs(head + w[K - 1] - 1.0) > kSimplexSumTol) {
      w[K - 1] = 1.0 - head;
    }
    out.emplace_back(std::move(w));
    return;
  }
  for (std::size_t c = 0; c <= remaining; ++c) {
    counts.push_back(c);
    grid_recurse(K, m, remaining - c, counts, out);
    counts.pop_back();
  }
}

}  // namespace

std::vector<ActionDistribution> simplex_grid(std::size_t K, std::size_t m) {
  if (K < 1) throw PreconditionError("simplex_grid: K must be positive");
  if (m < 1) throw PreconditionError("simplex_grid: resolution m must be >= 1");
  std::vector<ActionDistribution> out;
  out.reserve(binomial(m + K - 1, K - 1));
  std::vector<std::size_t> counts;
  counts.reserve(K);
  grid_recurse(K, m, m, counts, out);
  return out;
}

}  // namespace rpe
