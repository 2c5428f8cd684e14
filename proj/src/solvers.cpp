#include "rpe/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rpe/errors.hpp"

namespace rpe {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kResidualFloor = 1e-9;
constexpr std::size_t kStallIters = 200;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> axpy(std::span<const double> x, double s, std::span<const double> g) {
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= s * g[i];
  return y;
}

// Projected gradient with Armijo backtracking on {y : sum y = 1, y >= floor}.
// `f` evaluates the objective, `grad` its gradient. A small slack in the
// sufficient-decrease test absorbs rounding once decreases reach machine
// precision.
struct PgOutcome {
  std::vector<double> x;
  double f = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  std::vector<double> history;
  bool converged = false;
};

// One sweep of pairwise exact line searches. The directional derivative along
// e_q - e_p is g_q - g_p, nondecreasing for a convex objective, so its root is
// found by bisection. Returns true when some mass moved.
template <typename G>
bool equilibrate_pairs(std::vector<double>& x, double floor, G&& grad) {
  bool moved = false;
  const std::size_t K = x.size();
  for (std::size_t p = 0; p < K; ++p) {
    auto g = grad(x);
    const std::size_t q = static_cast<std::size_t>(std::min_element(g.begin(), g.end()) - g.begin());
    if (p == q || x[p] <= floor || g[p] - g[q] <= 0.0) continue;
    auto at = [&](double t) {
      auto y = x;
      y[p] -= t;
      y[q] += t;
      const auto gy = grad(y);
      return gy[q] - gy[p];
    };
    const double tmax = x[p] - floor;
    double t = tmax;
    if (at(tmax) > 0.0) {
      double lo = 0.0;
      double hi = tmax;
      for (int it = 0; it < 80 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (at(mid) > 0.0 ? hi : lo) = mid;
      }
      t = lo;
    }
    if (t <= 0.0) continue;
    x[p] = t == tmax ? floor : x[p] - t;
    x[q] += t;
    moved = true;
  }
  return moved;
}

template <typename F, typename G>
PgOutcome projected_gradient(std::vector<double> x, double floor, F&& f, G&& grad, double tol,
                             std::size_t max_iters, bool keep_history) {
  PgOutcome out;
  x = project_truncated(x, floor).vec();
  double fx = f(x);
  double step = 1.0;
  if (keep_history) out.history.push_back(fx);
  double best_residual = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    const auto g = grad(x);
    const auto unit = project_truncated(axpy(x, 1.0, g), floor).vec();
    out.residual = linf_distance(x, unit);
    out.iterations = it;
    if (out.residual <= tol) {
      out.converged = true;
      break;
    }
    step = std::min(step * 2.0, 1e8);
    bool accepted = false;
    while (step > 1e-20) {
      auto y = project_truncated(axpy(x, step, g), floor).vec();
      std::vector<double> d(y.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = y[i] - x[i];
      const double fy = f(y);
      const double slack = 1e-15 * (1.0 + std::abs(fx));
      if (fy <= fx + kArmijo * dot(g, d) + slack) {
        if (linf_distance(x, y) == 0.0) break;
        x = std::move(y);
        fx = fy;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    // Exact line searches moving flow from each costlier coordinate to the
    // cheapest one. Plain gradient steps stall when one direction is nearly
    // flat and another strongly curved.
    if (equilibrate_pairs(x, floor, grad)) {
      fx = f(x);
      accepted = true;
    }
    if (keep_history) out.history.push_back(fx);
    const double after = linf_distance(x, project_truncated(axpy(x, 1.0, grad(x)), floor).vec());
    if (after <= tol) {
      out.residual = after;
      out.iterations = it + 1;
      out.converged = true;
      break;
    }
    // Near-flat directions leave objective changes below rounding, and the
    // Armijo slack then lets the iterate wander. Stop once the residual has
    // sat at a floating-point floor for a while.
    if (after < best_residual * 0.999) {
      best_residual = after;
      since_best = 0;
    } else if (++since_best >= kStallIters && best_residual <= kResidualFloor) {
      out.residual = after;
      out.iterations = it + 1;
      out.converged = after <= kResidualFloor;
      break;
    }
    if (!accepted) {
      // No representable decrease remains.
      out.converged = out.residual <= std::max(tol, kResidualFloor);
      break;
    }
  }
  out.x = std::move(x);
  out.f = fx;
  return out;
}

// Solves A x = b in place by Gaussian elimination with partial pivoting.
bool solve_dense(std::vector<std::vector<double>> A, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
    }
    if (std::abs(A[piv][c]) < 1e-14) return false;
    std::swap(A[piv], A[c]);
    std::swap(b[piv], b[c]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = n; c-- > 0;) {
    for (std::size_t k = c + 1; k < n; ++k) b[c] -= A[c][k] * b[k];
    b[c] /= A[c][c];
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------

EpsSchedule EpsSchedule::sixth(std::size_t n0, std::size_t n1) {
  if (n0 < 1 || n1 < n0) throw PreconditionError("schedule needs 1 <= n0 <= n1");
  EpsSchedule s;
  for (std::size_t n = n0; n <= n1; ++n) {
    s.n.push_back(n);
    s.eps.push_back(1.0 / (6.0 * static_cast<double>(n)));
  }
  return s;
}

EpsSchedule EpsSchedule::from_values(std::vector<double> eps) {
  EpsSchedule s;
  for (std::size_t i = 0; i < eps.size(); ++i) s.n.push_back(i + 1);
  s.eps = std::move(eps);
  s.validate();
  return s;
}

void EpsSchedule::validate(std::optional<double> floor_bound) const {
  if (eps.empty()) throw PreconditionError("empty epsilon schedule");
  if (n.size() != eps.size()) throw PreconditionError("schedule index size mismatch");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw PreconditionError("schedule entries must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1])) {
      throw PreconditionError("schedule must be strictly decreasing");
    }
  }
  if (floor_bound && !(eps.front() < *floor_bound)) {
    throw PreconditionError("first schedule entry must be below " + std::to_string(*floor_bound));
  }
}

BeckmannResult solve_beckmann(const CongestionNetwork& net, double eps,
                              const BeckmannOptions& opts) {
  const std::size_t K = net.num_paths();
  if (!(eps >= 0.0) || (eps > 0.0 && !(eps * static_cast<double>(K) < 1.0))) {
    throw PreconditionError("epsilon must lie in [0, 1/|P|) for the path floor");
  }
  std::vector<double> x0(K, 1.0 / static_cast<double>(K));
  if (opts.start) {
    if (opts.start->size() != K) throw PreconditionError("start dimension mismatch");
    x0 = *opts.start;
  }
  if (K == 1) {
    BeckmannResult r{ActionDistribution({1.0}), net.beckmann_objective(std::vector{1.0}, eps),
                     0.0, 0, {}};
    return r;
  }
  auto out = projected_gradient(
      x0, eps, [&](const std::vector<double>& x) { return net.beckmann_objective(x, eps); },
      [&](const std::vector<double>& x) { return net.perturbed_path_costs(x, eps); }, opts.tol,
      opts.max_iters, true);
  if (!out.converged) {
    throw SolverError("Beckmann solver did not reach the stationarity tolerance", out.x,
                      out.residual, out.history);
  }
  BeckmannResult r{ActionDistribution(out.x), out.f, out.residual, out.iterations,
                   std::move(out.history)};
  return r;
}

// ---------------------------------------------------------------------------

const char* to_string(KktReport::Verdict v) {
  switch (v) {
    case KktReport::Verdict::Pass:
      return "pass";
    case KktReport::Verdict::Fail:
      return "fail";
    case KktReport::Verdict::Malformed:
      return "malformed";
  }
  return "?";
}

KktReport verify_kkt(const CongestionNetwork& net, double eps, const ActionDistribution& flow,
                     double tol) {
  const std::size_t K = net.num_paths();
  if (flow.size() != K) throw PreconditionError("flow dimension mismatch");
  if (!TruncatedSimplex(K, eps).contains(flow.weights())) {
    for (double w : flow.weights()) {
      if (w < eps - 1e-9) throw PreconditionError("flow is below the epsilon floor");
    }
  }
  KktReport rep;
  rep.tol = tol;
  const auto cost = net.perturbed_path_costs(flow.weights(), eps);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < K; ++p) {
    if (flow[p] > eps + tol) best = std::min(best, cost[p]);
  }
  if (!std::isfinite(best)) {
    rep.verdict = KktReport::Verdict::Malformed;
    rep.message =
        "no path lies above the floor: 1 = sum tau(p) = |P| eps < 1 is impossible";
    return rep;
  }
  rep.lambda = -best;
  rep.mu.resize(K);
  rep.stationarity.assign(K, 0.0);
  rep.complementarity.assign(K, 0.0);
  for (std::size_t p = 0; p < K; ++p) {
    rep.mu[p] = cost[p] + rep.lambda;
    rep.complementarity[p] = std::max(0.0, -rep.mu[p]);
    if (flow[p] > eps + tol) rep.stationarity[p] = std::abs(rep.mu[p]);
    rep.max_residual =
        std::max({rep.max_residual, rep.stationarity[p], rep.complementarity[p]});
  }
  rep.verdict = rep.max_residual <= tol ? KktReport::Verdict::Pass : KktReport::Verdict::Fail;
  if (rep.verdict == KktReport::Verdict::Fail) {
    std::size_t worst = 0;
    for (std::size_t p = 0; p < K; ++p) {
      if (std::max(rep.stationarity[p], rep.complementarity[p]) >
          std::max(rep.stationarity[worst], rep.complementarity[worst])) {
        worst = p;
      }
    }
    rep.message = "path " + net.path_name(worst) + " violates the KKT conditions (mu = " +
                  std::to_string(rep.mu[worst]) + ")";
  }
  return rep;
}

// ---------------------------------------------------------------------------

double extrapolate_to_zero(const std::vector<double>& eps, const std::vector<double>& values) {
  if (eps.size() != values.size() || eps.empty()) {
    throw PreconditionError("extrapolation needs matching nonempty inputs");
  }
  std::vector<double> p = values;
  const std::size_t n = p.size();
  for (std::size_t m = 1; m < n; ++m) {
    for (std::size_t i = 0; i + m < n; ++i) {
      p[i] = (eps[i + m] * p[i] - eps[i] * p[i + 1]) / (eps[i + m] - eps[i]);
    }
  }
  return p[0];
}

namespace {

// Trajectory positions for extrapolation: the last entry, then entries whose n
// roughly halves each time.
std::vector<std::size_t> geometric_nodes(const std::vector<std::size_t>& ns, std::size_t count) {
  std::vector<std::size_t> idx;
  if (ns.empty()) return idx;
  std::size_t i = ns.size() - 1;
  idx.push_back(i);
  while (idx.size() < count) {
    const std::size_t target = ns[i] / 2;
    std::size_t j = i;
    while (j > 0 && ns[j] > target) --j;
    if (j == i || ns[j] > target) break;
    idx.push_back(j);
    i = j;
  }
  return idx;
}

}  // namespace

RpeLimitResult rpe_limit(const CongestionNetwork& net, const EpsSchedule& schedule,
                         const RpeLimitOptions& opts) {
  const std::size_t K = net.num_paths();
  schedule.validate(1.0 / static_cast<double>(K));
  RpeLimitResult res;
  res.strictly_increasing = net.all_strictly_increasing();
  std::optional<std::vector<double>> prev;
  std::vector<std::vector<bool>> active;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double eps = schedule.eps[i];
    BeckmannOptions bo = opts.beckmann;
    if (prev) bo.start = *prev;
    const BeckmannResult r = solve_beckmann(net, eps, bo);
    const KktReport k = verify_kkt(net, eps, r.flow, opts.kkt_tol);
    res.trajectory.push_back({schedule.n[i], eps, r.flow.vec(), r.objective, k.max_residual});
    std::vector<bool> act(K);
    for (std::size_t p = 0; p < K; ++p) act[p] = r.flow[p] <= eps + 1e-9;
    active.push_back(std::move(act));
    if (prev) res.cauchy.push_back(linf_distance(*prev, r.flow.weights()));
    prev = r.flow.vec();
  }
  res.final_iterate = ActionDistribution(*prev);
  res.cauchy_residual = res.cauchy.empty() ? 0.0 : res.cauchy.back();

  std::vector<std::size_t> ns;
  for (const auto& t : res.trajectory) ns.push_back(t.n);
  const auto nodes = geometric_nodes(ns, opts.extrapolation_nodes);
  bool same_active = nodes.size() >= 2;
  for (std::size_t j : nodes) same_active = same_active && active[j] == active[nodes[0]];
  res.limit = res.final_iterate;
  res.limit_method = "final-iterate";
  if (same_active) {
    std::vector<double> e;
    for (std::size_t j : nodes) e.push_back(res.trajectory[j].eps);
    std::vector<double> lim(K, 0.0);
    for (std::size_t p = 0; p < K; ++p) {
      if (active[nodes[0]][p]) continue;
      std::vector<double> v;
      for (std::size_t j : nodes) v.push_back(res.trajectory[j].coords[p]);
      lim[p] = extrapolate_to_zero(e, v);
      if (std::abs(lim[p]) < 1e-12) lim[p] = 0.0;
    }
    const auto proj = project_truncated(lim, 0.0);
    // Guard against a wild polynomial fit.
    if (linf_distance(proj.weights(), res.final_iterate.weights()) <=
        10.0 * res.trajectory.back().eps + 1e-9) {
      res.limit = proj;
      res.limit_method = "extrapolated";
    }
  }
  const std::size_t tail = std::max<std::size_t>(1, res.cauchy.size() / 10);
  double tail_max = 0.0;
  for (std::size_t i = res.cauchy.size() - std::min(tail, res.cauchy.size()); i < res.cauchy.size();
       ++i) {
    tail_max = std::max(tail_max, res.cauchy[i]);
  }
  res.unique_limit = res.strictly_increasing && tail_max <= 1e-4;
  return res;
}

// ---------------------------------------------------------------------------
// D/B fixed point

namespace {

struct FpState {
  const PerturbedEvaluator& ev;
  const TemplateFamily& family;
  double eps;

  std::vector<ActionDistribution> trembled(const std::vector<std::vector<double>>& mu) const {
    const std::size_t K = ev.game().num_actions();
    std::vector<ActionDistribution> h;
    for (const auto& m : mu) {
      std::vector<double> w(K);
      for (std::size_t a = 0; a < K; ++a) w[a] = (1.0 - eps) * m[a] + eps / static_cast<double>(K);
      h.push_back(project_truncated(w, 0.0));
    }
    return h;
  }

  ActionDistribution summary(const std::vector<std::vector<double>>& mu) const {
    return societal_summary(ev.game(), RandomizedProfile{trembled(mu)});
  }

  // Expected payoffs of every type at phi_t(s(h(mu))).
  std::vector<std::vector<double>> payoffs(const std::vector<std::vector<double>>& mu) const {
    const ActionDistribution tau = summary(mu);
    std::vector<std::vector<double>> out;
    for (std::size_t t = 0; t < mu.size(); ++t) {
      out.push_back(ev.expected_all(t, family.for_type(t).apply(tau, eps)));
    }
    return out;
  }
};

double regret(const std::vector<std::vector<double>>& mu,
              const std::vector<std::vector<double>>& u) {
  double r = 0.0;
  for (std::size_t t = 0; t < mu.size(); ++t) {
    const double best = *std::max_element(u[t].begin(), u[t].end());
    for (std::size_t a = 0; a < mu[t].size(); ++a) {
      if (mu[t][a] > 0.0) r = std::max(r, best - u[t][a]);
    }
  }
  return r;
}

// Equalizes the payoffs inside each type's candidate set by Newton's method on
// the mixture weights. Returns false when a weight leaves the face.
bool equalize(const FpState& st, std::vector<std::vector<double>>& mu,
              const std::vector<std::vector<std::size_t>>& sets) {
  struct Var {
    std::size_t t, a;
  };
  std::vector<Var> vars;
  for (std::size_t t = 0; t < sets.size(); ++t) {
    for (std::size_t i = 1; i < sets[t].size(); ++i) vars.push_back({t, sets[t][i]});
  }
  if (vars.empty()) return true;
  auto assign = [&](const std::vector<double>& x) {
    auto m = mu;
    for (std::size_t t = 0; t < sets.size(); ++t) {
      std::fill(m[t].begin(), m[t].end(), 0.0);
    }
    std::vector<double> rest(sets.size(), 1.0);
    for (std::size_t i = 0; i < vars.size(); ++i) {
      m[vars[i].t][vars[i].a] = x[i];
      rest[vars[i].t] -= x[i];
    }
    for (std::size_t t = 0; t < sets.size(); ++t) m[t][sets[t][0]] = rest[t];
    return m;
  };
  auto residual = [&](const std::vector<double>& x) {
    const auto u = st.payoffs(assign(x));
    std::vector<double> F;
    for (const Var& v : vars) F.push_back(u[v.t][v.a] - u[v.t][sets[v.t][0]]);
    return F;
  };
  auto norm = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  std::vector<double> x;
  for (const Var& v : vars) x.push_back(mu[v.t][v.a]);
  auto F = residual(x);
  for (int it = 0; it < 60 && norm(F) > 1e-15; ++it) {
    std::vector<std::vector<double>> J(vars.size(), std::vector<double>(vars.size()));
    for (std::size_t j = 0; j < vars.size(); ++j) {
      const double h = 1e-7;
      auto xp = x;
      xp[j] += h;
      const auto Fp = residual(xp);
      for (std::size_t i = 0; i < vars.size(); ++i) J[i][j] = (Fp[i] - F[i]) / h;
    }
    std::vector<double> dx(F.size());
    for (std::size_t i = 0; i < F.size(); ++i) dx[i] = -F[i];
    if (!solve_dense(J, dx)) return false;
    double s = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 40; ++ls, s *= 0.5) {
      auto xn = x;
      for (std::size_t i = 0; i < xn.size(); ++i) xn[i] += s * dx[i];
      const auto Fn = residual(xn);
      if (norm(Fn) < norm(F)) {
        x = std::move(xn);
        F = Fn;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  const auto m = assign(x);
  for (const auto& row : m) {
    for (double w : row) {
      if (w < -1e-12) return false;
    }
  }
  mu = m;
  for (auto& row : mu) {
    for (double& w : row) w = std::max(w, 0.0);
    const double s = std::accumulate(row.begin(), row.end(), 0.0);
    for (double& w : row) w /= s;
  }
  return true;
}

}  // namespace

FixedPointResult fixed_point_eps_rpe(const LargeGame& game, double eps,
                                     const TemplateFamily& family,
                                     const FixedPointOptions& opts) {
  PerturbedEvaluator ev(game, opts.mc);
  return fixed_point_eps_rpe(ev, eps, family, opts);
}

FixedPointResult fixed_point_eps_rpe(const PerturbedEvaluator& ev, double eps,
                                     const TemplateFamily& family,
                                     const FixedPointOptions& opts) {
  const LargeGame& game = ev.game();
  const std::size_t K = game.num_actions();
  const std::size_t T = game.num_types();
  if (!(eps > 0.0 && eps < 1.0)) throw PreconditionError("epsilon must lie in (0, 1)");
  family.validate(game);
  for (std::size_t t = 0; t < T; ++t) {
    if (!family.for_type(t).full_support()) {
      throw PreconditionError("fixed point needs a full-support perturbation template");
    }
  }
  FpState st{ev, family, eps};

  std::vector<std::vector<double>> mu(T, std::vector<double>(K, 1.0 / static_cast<double>(K)));
  if (opts.start) {
    if (opts.start->h.size() != T) throw PreconditionError("start profile size mismatch");
    for (std::size_t t = 0; t < T; ++t) mu[t] = opts.start->h[t].vec();
  }

  FixedPointResult best;
  best.residual = std::numeric_limits<double>::infinity();
  auto record = [&](const std::vector<std::vector<double>>& m, double r, std::size_t it) {
    if (r < best.residual) {
      best.residual = r;
      best.mu.h.clear();
      for (const auto& row : m) best.mu.h.push_back(project_truncated(row, 0.0));
      best.h.h = st.trembled(m);
      best.summary = st.summary(m);
      best.iterations = it;
    }
  };

  // Candidate sets at increasing tie widths; the averaged mixtures only
  // approximate the tie structure.
  const double widths[] = {opts.tie_tol, 1e-6, 1e-4, 1e-3, 1e-2};
  auto try_snap = [&](std::size_t it) {
    const auto u = st.payoffs(mu);
    for (double width : widths) {
      std::vector<std::vector<std::size_t>> sets(T);
      auto m = mu;
      for (std::size_t t = 0; t < T; ++t) {
        const double top = *std::max_element(u[t].begin(), u[t].end());
        double mass = 0.0;
        for (std::size_t a = 0; a < K; ++a) {
          if (u[t][a] >= top - width) {
            sets[t].push_back(a);
            mass += mu[t][a];
          }
        }
        for (std::size_t a = 0; a < K; ++a) {
          const bool in = std::find(sets[t].begin(), sets[t].end(), a) != sets[t].end();
          m[t][a] = !in ? 0.0
                        : (mass > 0.0 ? mu[t][a] / mass : 1.0 / static_cast<double>(sets[t].size()));
        }
        // Order each set by weight so the pivot action of the Newton system
        // carries mass.
        std::stable_sort(sets[t].begin(), sets[t].end(),
                         [&](std::size_t x, std::size_t y) { return m[t][x] > m[t][y]; });
        while (sets[t].size() > 1 && m[t][sets[t].back()] == 0.0) sets[t].pop_back();
      }
      if (!equalize(st, m, sets)) continue;
      const double r = regret(m, st.payoffs(m));
      record(m, r, it);
      if (r <= opts.tol) return true;
    }
    return false;
  };

  for (std::size_t it = 0; it < opts.max_iters; ++it) {
    if (it % opts.snap_every == 0 && try_snap(it)) break;
    const auto u = st.payoffs(mu);
    const double step = opts.alpha / (1.0 + opts.alpha * static_cast<double>(it));
    for (std::size_t t = 0; t < T; ++t) {
      const double top = *std::max_element(u[t].begin(), u[t].end());
      std::vector<std::size_t> br;
      for (std::size_t a = 0; a < K; ++a) {
        if (u[t][a] >= top - opts.tie_tol) br.push_back(a);
      }
      for (std::size_t a = 0; a < K; ++a) mu[t][a] *= 1.0 - step;
      for (std::size_t a : br) mu[t][a] += step / static_cast<double>(br.size());
    }
    best.history.push_back(regret(mu, u));
  }
  if (!(best.residual <= opts.tol)) {
    std::vector<double> flat;
    for (const auto& d : best.h.h) flat.insert(flat.end(), d.vec().begin(), d.vec().end());
    throw SolverError("best-response fixed point did not converge", flat, best.residual,
                      best.history);
  }
  return best;
}

GameLimitResult rpe_limit_game(const LargeGame& game, const EpsSchedule& schedule,
                               const TemplateFamily& family, const GameLimitOptions& opts) {
  schedule.validate();
  if (!(schedule.eps.front() < 1.0)) throw PreconditionError("schedule entries must be below 1");
  PerturbedEvaluator ev(game, opts.fixed_point.mc);
  GameLimitResult res;
  FixedPointOptions fo = opts.fixed_point;
  const std::size_t K = game.num_actions();
  const std::size_t T = game.num_types();
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const FixedPointResult r = fixed_point_eps_rpe(ev, schedule.eps[i], family, fo);
    res.trajectory.push_back({schedule.n[i], schedule.eps[i], r.h, r.mu, r.summary, r.residual});
    fo.start = r.mu;
  }

  auto profile_dist = [](const RandomizedProfile& x, const RandomizedProfile& y) {
    double d = 0.0;
    for (std::size_t t = 0; t < x.h.size(); ++t) {
      d = std::max(d, linf_distance(x.h[t].weights(), y.h[t].weights()));
    }
    return d;
  };
  const std::size_t N = res.trajectory.size();
  const std::size_t tail = std::max<std::size_t>(1, N / 10);
  for (std::size_t i = N > tail ? N - tail : 1; i < N; ++i) {
    res.profile_cauchy =
        std::max(res.profile_cauchy, profile_dist(res.trajectory[i].h, res.trajectory[i - 1].h));
    res.summary_cauchy =
        std::max(res.summary_cauchy, linf_distance(res.trajectory[i].summary.weights(),
                                                   res.trajectory[i - 1].summary.weights()));
  }
  res.profiles_converge = N >= 2 && res.profile_cauchy <= opts.cauchy_tol;
  res.summaries_converge = N >= 2 && res.summary_cauchy <= opts.cauchy_tol;
  res.converged = res.profiles_converge && res.summaries_converge;

  // Limit of the best-response mixtures: extrapolate when supports are stable.
  std::vector<std::size_t> ns;
  for (const auto& p : res.trajectory) ns.push_back(p.n);
  const auto nodes = geometric_nodes(ns, opts.extrapolation_nodes);
  auto support = [&](const RandomizedProfile& m) {
    std::vector<bool> s;
    for (const auto& d : m.h) {
      for (double w : d.weights()) s.push_back(w > 0.0);
    }
    return s;
  };
  bool stable = nodes.size() >= 2;
  for (std::size_t j : nodes) {
    stable = stable && support(res.trajectory[j].mu) == support(res.trajectory[nodes[0]].mu);
  }
  const RandomizedProfile& last_mu = res.trajectory.back().mu;
  res.limit = last_mu;
  res.limit_method = "final-mixture";
  if (stable) {
    std::vector<double> e;
    for (std::size_t j : nodes) e.push_back(res.trajectory[j].eps);
    RandomizedProfile lim;
    for (std::size_t t = 0; t < T; ++t) {
      std::vector<double> w(K, 0.0);
      for (std::size_t a = 0; a < K; ++a) {
        if (last_mu.h[t][a] == 0.0) continue;
        std::vector<double> v;
        for (std::size_t j : nodes) v.push_back(res.trajectory[j].mu.h[t][a]);
        w[a] = extrapolate_to_zero(e, v);
        if (std::abs(w[a]) < 1e-12) w[a] = 0.0;
      }
      lim.h.push_back(project_truncated(w, 0.0));
    }
    if (profile_dist(lim, last_mu) <= 10.0 * schedule.eps.back() + 1e-9) {
      res.limit = lim;
      res.limit_method = "extrapolated";
    }
  }
  res.limit_summary = societal_summary(game, res.limit);
  return res;
}

// ---------------------------------------------------------------------------

PoaResult price_of_anarchy(const CongestionNetwork& net, const PoaOptions& opts) {
  PoaResult res;
  const std::size_t K = net.num_paths();
  const auto lim = rpe_limit(net, opts.schedule);
  res.equilibrium_flow = lim.limit;
  res.equilibrium_cost = net.social_cost(lim.limit.weights());

  // x C_e(x) convexity by second differences.
  const double h = 1.0 / static_cast<double>(kCostCheckGrid);
  auto phi = [&](std::size_t e, double x) { return x * net.edge_cost(e, x); };
  for (std::size_t e = 0; e < net.num_edges() && res.convex; ++e) {
    if (net.paths_through(e) == 0) continue;
    for (std::size_t i = 1; i < kCostCheckGrid; ++i) {
      const double x = static_cast<double>(i) * h;
      if (phi(e, x - h) - 2.0 * phi(e, x) + phi(e, x + h) < -1e-9) {
        res.convex = false;
        break;
      }
    }
  }

  auto f = [&](const std::vector<double>& x) { return net.social_cost(x); };
  auto grad = [&](const std::vector<double>& x) {
    const auto load = net.edge_loads(x);
    std::vector<double> ge(net.num_edges());
    const double d = 1e-7;
    for (std::size_t e = 0; e < ge.size(); ++e) {
      ge[e] = (phi(e, load[e] + d) - phi(e, load[e] - d)) / (2.0 * d);
    }
    std::vector<double> g(K, 0.0);
    for (std::size_t p = 0; p < K; ++p) {
      for (std::size_t e : net.paths()[p]) g[p] += ge[e];
    }
    return g;
  };
  std::vector<std::vector<double>> starts{std::vector<double>(K, 1.0 / static_cast<double>(K))};
  if (!res.convex) {
    for (std::size_t k = 0; k < K; ++k) starts.push_back(ActionDistribution::vertex(K, k).vec());
    for (const auto& s : uniform_samples(std::max<std::size_t>(K, 2), opts.random_starts, opts.seed)) {
      if (s.size() == K) starts.push_back(s.vec());
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    auto out = projected_gradient(s, 0.0, f, grad, 1e-11, 200000, false);
    if (out.f < best) {
      best = out.f;
      res.optimum_flow = ActionDistribution(out.x);
    }
  }
  res.optimum_cost = best;
  res.method = res.convex ? "convex projected gradient" : "multi-start projected gradient (best found)";
  if (res.optimum_cost <= 1e-15) {
    res.ratio = res.equilibrium_cost <= 1e-15 ? 1.0 : std::numeric_limits<double>::infinity();
  } else {
    res.ratio = res.equilibrium_cost / res.optimum_cost;
  }
  return res;
}

}  // namespace rpe
