#include "rpe/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>

#include <json.hpp>

#include "rpe/errors.hpp"

namespace rpe {

using nlohmann::json;

CongestionNetwork::CongestionNetwork(std::vector<std::string> nodes, std::vector<Edge> edges,
                                     std::string origin, std::string destination,
                                     std::size_t path_cap)
    : nodes_(std::move(nodes)),
      edges_(std::move(edges)),
      origin_(std::move(origin)),
      destination_(std::move(destination)) {
  std::set<std::string> node_set(nodes_.begin(), nodes_.end());
  if (node_set.size() != nodes_.size()) throw ModelError("duplicate node name");
  if (!node_set.count(origin_)) throw ModelError("unknown origin '" + origin_ + "'");
  if (!node_set.count(destination_)) {
    throw ModelError("unknown destination '" + destination_ + "'");
  }
  if (origin_ == destination_) throw PreconditionError("origin and destination coincide");
  std::set<std::string> ids;
  for (const Edge& e : edges_) {
    if (!ids.insert(e.id).second) throw ModelError("duplicate edge id '" + e.id + "'");
    if (!node_set.count(e.from) || !node_set.count(e.to)) {
      throw ModelError("edge '" + e.id + "' references an unknown node");
    }
    for (std::size_t v : e.cost.variables()) {
      if (v != 0) throw ModelError("edge '" + e.id + "' cost may only depend on x");
    }
  }

  const double h = 1.0 / static_cast<double>(kCostCheckGrid);
  strict_.assign(edges_.size(), true);
  kinks_.resize(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const Expr& c = edges_[e].cost;
    auto jump = find_discontinuity(c, [](const Expr&, double t) {
      return std::vector<std::vector<double>>{{t}};
    });
    if (jump) throw ModelError("edge '" + edges_[e].id + "' cost is discontinuous: " + *jump);
    double prev = edge_cost(e, 0.0);
    if (prev < 0.0) throw ModelError("edge '" + edges_[e].id + "' cost is negative");
    for (std::size_t i = 1; i <= kCostCheckGrid; ++i) {
      const double cur = edge_cost(e, static_cast<double>(i) * h);
      if (cur < 0.0) throw ModelError("edge '" + edges_[e].id + "' cost is negative");
      if (cur < prev - 1e-12) {
        throw ModelError("edge '" + edges_[e].id + "' cost is decreasing near x = " +
                         std::to_string(static_cast<double>(i) * h));
      }
      if ((cur - prev) / h < kStrictSlope) strict_[e] = false;
      prev = cur;
    }
    for (const Expr& sw : c.switch_functions()) {
      auto roots = sign_change_points([&sw](double x) { return sw.eval(std::span(&x, 1)); },
                                      0.0, 1.0);
      kinks_[e].insert(kinks_[e].end(), roots.begin(), roots.end());
    }
    std::sort(kinks_[e].begin(), kinks_[e].end());
  }

  enumerate_paths(path_cap);

  edge_path_count_.assign(edges_.size(), 0);
  for (const auto& p : paths_) {
    for (std::size_t e : p) ++edge_path_count_[e];
  }
  const std::size_t K = paths_.size();
  eta_.assign(edges_.size(), 0.0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_path_count_[e] == 0) {
      eta_[e] = edge_cost(e, 0.0);
      continue;
    }
    if (edge_path_count_[e] == K) {
      eta_[e] = edge_cost(e, 1.0);
      continue;
    }
    const Expr& c = edges_[e].cost;
    eta_[e] = beta_marginal_expectation(
        [&c](double x) { return c.eval(std::span(&x, 1)); }, edge_path_count_[e], K,
        kDefaultQuadratureNodes, kinks_[e]);
  }
}

void CongestionNetwork::enumerate_paths(std::size_t cap) {
  std::map<std::string, std::vector<std::size_t>> out_edges;
  for (std::size_t e = 0; e < edges_.size(); ++e) out_edges[edges_[e].from].push_back(e);
  std::vector<std::size_t> stack;
  std::set<std::string> visited{origin_};
  std::function<void(const std::string&)> dfs = [&](const std::string& node) {
    if (node == destination_) {
      if (paths_.size() >= cap) {
        throw ResourceError("path count exceeds the cap of " + std::to_string(cap));
      }
      paths_.push_back(stack);
      return;
    }
    auto it = out_edges.find(node);
    if (it == out_edges.end()) return;
    for (std::size_t e : it->second) {
      const std::string& next = edges_[e].to;
      if (visited.count(next)) continue;
      visited.insert(next);
      stack.push_back(e);
      dfs(next);
      stack.pop_back();
      visited.erase(next);
    }
  };
  dfs(origin_);
  if (paths_.empty()) {
    throw ModelError("no path from '" + origin_ + "' to '" + destination_ + "'");
  }
  std::sort(paths_.begin(), paths_.end(), [this](const auto& a, const auto& b) {
    return std::lexicographical_compare(
        a.begin(), a.end(), b.begin(), b.end(),
        [this](std::size_t x, std::size_t y) { return edges_[x].id < edges_[y].id; });
  });
}

std::string CongestionNetwork::path_name(std::size_t p) const {
  std::string s;
  for (std::size_t e : paths_.at(p)) {
    if (!s.empty()) s += '-';
    s += edges_[e].id;
  }
  return s;
}

std::vector<std::string> CongestionNetwork::path_names() const {
  std::vector<std::string> out;
  for (std::size_t p = 0; p < paths_.size(); ++p) out.push_back(path_name(p));
  return out;
}

std::size_t CongestionNetwork::edge_index(std::string_view id) const {
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edges_[e].id == id) return e;
  }
  throw LookupError("unknown edge '" + std::string(id) + "'");
}

std::size_t CongestionNetwork::path_index(std::string_view name) const {
  for (std::size_t p = 0; p < paths_.size(); ++p) {
    if (path_name(p) == name) return p;
  }
  throw LookupError("unknown path '" + std::string(name) + "'");
}

double CongestionNetwork::edge_cost(std::size_t e, double x) const {
  return edges_[e].cost.eval(std::span(&x, 1));
}

double CongestionNetwork::perturbed_edge_cost(std::size_t e, double x, double eps) const {
  if (eps == 0.0) return edge_cost(e, x);
  return (1.0 - eps) * edge_cost(e, x) + eps * eta_[e];
}

double CongestionNetwork::cost_integral(std::size_t e, double x) const {
  if (x <= 0.0) return 0.0;
  std::vector<double> breaks;
  for (double k : kinks_[e]) {
    if (k < x) breaks.push_back(k);
  }
  return default_quadrature().integrate_piecewise(
      [this, e](double y) { return edge_cost(e, y); }, 0.0, x, breaks);
}

bool CongestionNetwork::all_strictly_increasing() const {
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_path_count_[e] > 0 && !strict_[e]) return false;
  }
  return true;
}

std::vector<double> CongestionNetwork::edge_loads(std::span<const double> flow) const {
  if (flow.size() != paths_.size()) throw PreconditionError("flow dimension mismatch");
  std::vector<double> load(edges_.size(), 0.0);
  for (std::size_t p = 0; p < paths_.size(); ++p) {
    for (std::size_t e : paths_[p]) load[e] += flow[p];
  }
  return load;
}

double CongestionNetwork::path_cost(std::size_t p, std::span<const double> flow) const {
  const auto load = edge_loads(flow);
  double c = 0.0;
  for (std::size_t e : paths_.at(p)) c += edge_cost(e, load[e]);
  return c;
}

std::vector<double> CongestionNetwork::path_costs(std::span<const double> flow) const {
  const auto load = edge_loads(flow);
  std::vector<double> ce(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) ce[e] = edge_cost(e, load[e]);
  std::vector<double> out(paths_.size(), 0.0);
  for (std::size_t p = 0; p < paths_.size(); ++p) {
    for (std::size_t e : paths_[p]) out[p] += ce[e];
  }
  return out;
}

std::vector<double> CongestionNetwork::perturbed_path_costs(std::span<const double> flow,
                                                            double eps) const {
  const auto load = edge_loads(flow);
  std::vector<double> ce(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) ce[e] = perturbed_edge_cost(e, load[e], eps);
  std::vector<double> out(paths_.size(), 0.0);
  for (std::size_t p = 0; p < paths_.size(); ++p) {
    for (std::size_t e : paths_[p]) out[p] += ce[e];
  }
  return out;
}

double CongestionNetwork::beckmann_objective(std::span<const double> flow, double eps) const {
  if (!(eps >= 0.0 && eps < 1.0)) throw PreconditionError("epsilon must lie in [0, 1)");
  const auto load = edge_loads(flow);
  double f = 0.0;
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    if (edge_path_count_[e] == 0) continue;
    f += (1.0 - eps) * cost_integral(e, load[e]) + eps * eta_[e] * load[e];
  }
  return f;
}

double CongestionNetwork::social_cost(std::span<const double> flow) const {
  const auto load = edge_loads(flow);
  double c = 0.0;
  for (std::size_t e = 0; e < edges_.size(); ++e) c += edge_cost(e, load[e]) * load[e];
  return c;
}

std::vector<std::vector<std::size_t>> enumerate_paths(const CongestionNetwork& net) {
  return net.paths();
}

std::vector<Expr> negative_path_cost_exprs(const CongestionNetwork& net) {
  // Load expressions summed in path order so evaluation matches edge_loads
  // operation for operation.
  std::vector<std::optional<Expr>> load(net.num_edges());
  for (std::size_t p = 0; p < net.num_paths(); ++p) {
    for (std::size_t e : net.paths()[p]) {
      load[e] = load[e] ? Expr::add(*load[e], Expr::variable(p)) : Expr::variable(p);
    }
  }
  std::vector<Expr> out;
  for (std::size_t p = 0; p < net.num_paths(); ++p) {
    std::optional<Expr> cost;
    for (std::size_t e : net.paths()[p]) {
      const Expr ce = net.edges()[e].cost.substitute(std::span(&*load[e], 1));
      cost = cost ? Expr::add(*cost, ce) : ce;
    }
    out.push_back(Expr::neg(*cost));
  }
  return out;
}

LargeGame as_large_game(const CongestionNetwork& net) {
  PayoffType t;
  t.id = "drivers";
  t.mass = 1.0;
  t.payoff = negative_path_cost_exprs(net);
  return LargeGame(net.path_names(), {std::move(t)});
}

bool looks_like_network(std::string_view json_text) {
  try {
    const json j = json::parse(json_text);
    return j.is_object() && j.contains("edges");
  } catch (const json::parse_error&) {
    return false;
  }
}

CongestionNetwork parse_network(std::string_view json_text, const std::string& context,
                                std::size_t path_cap) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(context, e.what());
  }
  for (const char* key : {"nodes", "edges", "origin", "destination"}) {
    if (!j.is_object() || !j.contains(key)) {
      throw ParseError(context, std::string("network file needs \"") + key + "\"");
    }
  }
  std::vector<std::string> nodes = j.at("nodes").get<std::vector<std::string>>();
  const VariableResolver resolver = load_variable_resolver();
  std::vector<Edge> edges;
  std::size_t i = 0;
  for (const auto& je : j.at("edges")) {
    const std::string ctx = context + ".edges[" + std::to_string(i++) + "]";
    for (const char* key : {"id", "from", "to", "cost"}) {
      if (!je.contains(key)) throw ParseError(ctx, std::string("edge needs \"") + key + "\"");
    }
    Edge e;
    e.id = je.at("id").get<std::string>();
    e.from = je.at("from").get<std::string>();
    e.to = je.at("to").get<std::string>();
    const auto& jc = je.at("cost");
    e.cost = jc.is_number() ? Expr::constant(jc.get<double>())
                            : parse_expression(jc.get<std::string>(), resolver, ctx + ".cost");
    edges.push_back(std::move(e));
  }
  return CongestionNetwork(std::move(nodes), std::move(edges), j.at("origin").get<std::string>(),
                           j.at("destination").get<std::string>(), path_cap);
}

CongestionNetwork load_network(const std::string& path, std::size_t path_cap) {
  return parse_network(read_text_file(path), path, path_cap);
}

std::string network_to_json(const CongestionNetwork& net) {
  json j;
  j["nodes"] = net.nodes();
  j["origin"] = net.origin();
  j["destination"] = net.destination();
  j["edges"] = json::array();
  for (const Edge& e : net.edges()) {
    j["edges"].push_back({{"id", e.id},
                          {"from", e.from},
                          {"to", e.to},
                          {"cost", e.cost.to_string([](std::size_t) { return "x"; })}});
  }
  return j.dump(2);
}

}  // namespace rpe
