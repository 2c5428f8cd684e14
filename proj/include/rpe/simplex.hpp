#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace rpe {

/// Absolute tolerance on the unit-sum constraint of a simplex point.
inline constexpr double kSimplexSumTol = 1e-12;

/// A probability vector over K actions (a point of the unit simplex).
///
/// Holds societal summaries, individual randomized strategies and the
/// perturbation atoms. Construction validates nonnegativity and unit sum.
class ActionDistribution {
 public:
  ActionDistribution() = default;
  explicit ActionDistribution(std::vector<double> weights);
  ActionDistribution(std::initializer_list<double> weights)
      : ActionDistribution(std::vector<double>(weights)) {}

  static ActionDistribution vertex(std::size_t K, std::size_t k);
  static ActionDistribution uniform(std::size_t K);

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t k) const { return weights_[k]; }
  std::span<const double> weights() const noexcept { return weights_; }
  const std::vector<double>& vec() const noexcept { return weights_; }

  double min_weight() const;
  bool full_support() const { return min_weight() > 0.0; }

  friend bool operator==(const ActionDistribution&,
                         const ActionDistribution&) = default;

 private:
  std::vector<double> weights_;
};

/// Convex combination sum_i coeffs[i] * points[i]; coefficients must be a
/// probability vector.
ActionDistribution mix(std::span<const ActionDistribution> points,
                       std::span<const double> coeffs);

double linf_distance(std::span<const double> x, std::span<const double> y);

/// The truncated simplex {x : sum x = 1, x_k >= floor}.
class TruncatedSimplex {
 public:
  TruncatedSimplex(std::size_t K, double floor);

  std::size_t dimension() const noexcept { return K_; }
  double floor() const noexcept { return floor_; }
  bool contains(std::span<const double> x) const;

 private:
  std::size_t K_;
  double floor_;
};

/// Euclidean projection of x onto {y : sum y = 1, y_k >= floor}.
///
/// Exact sort-based projection: substitute y = floor + z and project z onto
/// the simplex scaled to 1 - K*floor.
ActionDistribution project_truncated(std::span<const double> x, double floor);

/// Seedable 64-bit generator. Sequences are fixed by the standard definition of
/// mt19937_64, and uniform variates are built from raw bits (not from the
/// implementation-defined std distributions) so samples are reproducible across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Unit-rate exponential variate.
  double exponential();

 private:
  std::mt19937_64 engine_;
};

/// n independent draws from the flat Dirichlet distribution on the K-simplex.
std::vector<ActionDistribution> uniform_samples(std::size_t K, std::size_t n,
                                                std::uint64_t seed);

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(std::size_t n);

  /// Integral of f over [a, b].
  double integrate(const std::function<double(double)>& f, double a,
                   double b) const;
  /// Integral of f over [a, b], splitting at the given interior breakpoints.
  double integrate_piecewise(const std::function<double(double)>& f, double a,
                             double b, std::span<const double> breakpoints) const;
};

/// Shared 64-node rule.
const GaussLegendre& default_quadrature();

inline constexpr std::size_t kDefaultQuadratureNodes = 64;

/// Expectation of c(S) where S is the sum of k coordinates of a flat-Dirichlet
/// point on the K-simplex. S ~ Beta(k, K-k), so the expectation is a 1-D
/// integral, computed by Gauss-Legendre on [0, 1] split at `breakpoints`.
double beta_marginal_expectation(const std::function<double(double)>& c,
                                 std::size_t k, std::size_t K,
                                 std::size_t nodes = kDefaultQuadratureNodes,
                                 std::span<const double> breakpoints = {});

/// Density of Beta(k, K-k) at x.
double beta_density(double x, std::size_t k, std::size_t K);

/// All simplex points whose coordinates are multiples of 1/m, ordered
/// lexicographically by coordinates.
std::vector<ActionDistribution> simplex_grid(std::size_t K, std::size_t m);

/// binomial(n, r) as a double-free exact count.
std::uint64_t binomial(std::uint64_t n, std::uint64_t r);

}  // namespace rpe
