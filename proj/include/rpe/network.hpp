#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rpe/expr.hpp"
#include "rpe/game.hpp"
#include "rpe/simplex.hpp"

namespace rpe {

inline constexpr std::size_t kDefaultPathCap = 10000;
/// Grid used for load-time monotonicity and strict-increase checks.
inline constexpr std::size_t kCostCheckGrid = 1000;
inline constexpr double kStrictSlope = 1e-9;

struct Edge {
  std::string id;
  std::string from;
  std::string to;
  Expr cost;  // in the single variable x (index 0)
};

/// Single origin-destination network with a unit mass of travellers. Paths are
/// enumerated at construction; the eta-integral of every edge cost (eta
/// uniform on the path-flow simplex) is computed once and cached.
class CongestionNetwork {
 public:
  CongestionNetwork(std::vector<std::string> nodes, std::vector<Edge> edges,
                    std::string origin, std::string destination,
                    std::size_t path_cap = kDefaultPathCap);

  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::string& origin() const noexcept { return origin_; }
  const std::string& destination() const noexcept { return destination_; }

  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t num_paths() const noexcept { return paths_.size(); }
  /// Each path as edge indices, in travel order.
  const std::vector<std::vector<std::size_t>>& paths() const noexcept { return paths_; }
  /// Edge ids joined by '-'.
  std::string path_name(std::size_t p) const;
  std::vector<std::string> path_names() const;
  std::size_t edge_index(std::string_view id) const;
  std::size_t path_index(std::string_view name) const;
  /// Number of paths through edge e.
  std::size_t paths_through(std::size_t e) const { return edge_path_count_[e]; }

  double edge_cost(std::size_t e, double x) const;
  /// (1 - eps) C_e(x) + eps * E_eta[C_e(tau'(e))].
  double perturbed_edge_cost(std::size_t e, double x, double eps) const;
  double eta_integral(std::size_t e) const { return eta_[e]; }
  /// Integral of C_e over [0, x].
  double cost_integral(std::size_t e, double x) const;
  bool strictly_increasing(std::size_t e) const { return strict_[e]; }
  bool all_strictly_increasing() const;

  std::vector<double> edge_loads(std::span<const double> flow) const;
  double path_cost(std::size_t p, std::span<const double> flow) const;
  std::vector<double> path_costs(std::span<const double> flow) const;
  std::vector<double> perturbed_path_costs(std::span<const double> flow, double eps) const;
  double beckmann_objective(std::span<const double> flow, double eps) const;
  double social_cost(std::span<const double> flow) const;

 private:
  void enumerate_paths(std::size_t cap);

  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;
  std::string origin_;
  std::string destination_;
  std::vector<std::vector<std::size_t>> paths_;
  std::vector<std::size_t> edge_path_count_;
  std::vector<double> eta_;
  std::vector<bool> strict_;
  std::vector<std::vector<double>> kinks_;  // cost kinks in (0, 1) per edge
};

std::vector<std::vector<std::size_t>> enumerate_paths(const CongestionNetwork& net);

/// Single type of mass 1 whose payoff for path p is -C_p(tau), written over
/// the path-flow coordinates.
LargeGame as_large_game(const CongestionNetwork& net);

/// u(p, tau) = -C_p(tau) as expressions, one per path (the natural potential
/// differences for check_potential).
std::vector<Expr> negative_path_cost_exprs(const CongestionNetwork& net);

CongestionNetwork parse_network(std::string_view json_text, const std::string& context = {},
                                std::size_t path_cap = kDefaultPathCap);
CongestionNetwork load_network(const std::string& path, std::size_t path_cap = kDefaultPathCap);
std::string network_to_json(const CongestionNetwork& net);

/// True when the JSON document looks like a network (has "edges").
bool looks_like_network(std::string_view json_text);

}  // namespace rpe
