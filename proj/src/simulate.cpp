#include "rpe/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rpe/errors.hpp"

namespace rpe {

std::vector<std::size_t> apportion(const LargeGame& game, std::size_t N) {
  const std::size_t T = game.num_types();
  std::vector<std::size_t> n(T);
  std::vector<std::pair<double, std::size_t>> rem(T);
  std::size_t used = 0;
  for (std::size_t t = 0; t < T; ++t) {
    const double q = game.type(t).mass * static_cast<double>(N);
    n[t] = static_cast<std::size_t>(std::floor(q));
    used += n[t];
    rem[t] = {q - std::floor(q), t};
  }
  // Larger remainders first; ties go to the earlier type.
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t i = 0; used < N; ++i, ++used) ++n[rem[i % T].second];
  return n;
}

Realization sample_realization(const LargeGame& game, const RandomizedProfile& h, std::size_t N,
                               std::uint64_t seed) {
  if (N < 1) throw PreconditionError("need at least one player");
  if (h.h.size() != game.num_types()) throw PreconditionError("profile must cover every type");
  const std::size_t K = game.num_actions();
  Realization r;
  r.N = N;
  r.seed = seed;
  r.type_of.reserve(N);
  r.action_of.reserve(N);
  r.counts.assign(game.num_types(), std::vector<std::size_t>(K, 0));
  Rng rng(seed);
  const auto sizes = apportion(game, N);
  std::vector<std::size_t> total(K, 0);
  for (std::size_t t = 0; t < sizes.size(); ++t) {
    std::vector<double> cdf(K);
    std::partial_sum(h.h[t].vec().begin(), h.h[t].vec().end(), cdf.begin());
    for (std::size_t i = 0; i < sizes[t]; ++i) {
      const double u = rng.uniform() * cdf.back();
      std::size_t a = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) -
                                               cdf.begin());
      // Guard against landing past the last positive weight by rounding.
      a = std::min(a, K - 1);
      while (h.h[t][a] <= 0.0 && a > 0) --a;
      r.type_of.push_back(t);
      r.action_of.push_back(a);
      ++r.counts[t][a];
      ++total[a];
    }
  }
  std::vector<double> s(K);
  for (std::size_t a = 0; a < K; ++a) s[a] = static_cast<double>(total[a]) / static_cast<double>(N);
  r.summary = ActionDistribution(std::move(s));
  return r;
}

EllnReport elln_report(const LargeGame& game, const RandomizedProfile& h,
                       const std::vector<std::size_t>& Ns, std::size_t trials,
                       std::uint64_t seed) {
  if (Ns.empty()) throw PreconditionError("need at least one population size");
  if (trials < 1) throw PreconditionError("need at least one trial");
  const auto target = societal_summary(game, h);
  EllnReport rep;
  rep.Ns = Ns;
  rep.seed = seed;
  rep.trials = trials;
  for (std::size_t N : Ns) {
    double sum = 0.0;
    for (std::size_t i = 0; i < trials; ++i) {
      Rng derive(seed, (static_cast<std::uint64_t>(N) << 16) + i);
      const auto r = sample_realization(game, h, N, derive.next_u64());
      const double err = linf_distance(r.summary.weights(), target.weights());
      rep.rows.push_back({N, i, err});
      sum += err;
    }
    rep.mean_error.push_back(sum / static_cast<double>(trials));
  }
  // Least squares on the sizes with a positive mean error.
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t j = 0; j < Ns.size(); ++j) {
    if (rep.mean_error[j] > 0.0) {
      xs.push_back(std::log(static_cast<double>(Ns[j])));
      ys.push_back(std::log(rep.mean_error[j]));
    }
  }
  if (xs.size() >= 2) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      sxy += (xs[j] - mx) * (ys[j] - my);
      sxx += (xs[j] - mx) * (xs[j] - mx);
    }
    rep.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  return rep;
}

CheckReport ex_post_check(const LargeGame& game, const Realization& r, double eps,
                          const TemplateFamily& family, const ExPostOptions& opts) {
  if (r.counts.size() != game.num_types() || r.N == 0) {
    throw PreconditionError("realization does not match the game");
  }
  const std::size_t K = game.num_actions();
  std::vector<PayoffType> cells;
  RandomizedProfile pure;
  RandomizedProfile trembled;
  std::vector<std::size_t> cell_type;
  for (std::size_t t = 0; t < game.num_types(); ++t) {
    for (std::size_t a = 0; a < K; ++a) {
      if (r.counts[t][a] == 0) continue;
      cells.push_back({game.type(t).id + ":" + game.actions()[a],
                       static_cast<double>(r.counts[t][a]) / static_cast<double>(r.N),
                       game.type(t).payoff});
      cell_type.push_back(t);
      pure.h.push_back(ActionDistribution::vertex(K, a));
      trembled.h.push_back(mix(std::vector{ActionDistribution::vertex(K, a),
                                           ActionDistribution::uniform(K)},
                               std::vector{1.0 - eps, eps}));
    }
  }
  const LargeGame enriched(game.actions(), std::move(cells));
  TemplateFamily fam = family;
  if (fam.per_type.size() > 1) {
    fam.per_type.clear();
    for (std::size_t c : cell_type) fam.per_type.push_back(family.for_type(c));
  }

  CheckReport out;
  out.check = "ex-post";
  out.echo("N", static_cast<double>(r.N));
  out.echo("seed", static_cast<double>(r.seed));
  out.echo("epsilon", eps);
  out.echo("tol", opts.tol);
  out.parts.push_back(check_nash(enriched, pure, opts.tol));
  EpsRpeOptions eo = opts.eps_rpe;
  eo.tol = std::max(eo.tol, opts.tol);
  out.parts.push_back(check_eps_rpe(enriched, trembled, eps, fam, eo));
  const double regret = out.parts[0].find_margin("max_regret").value_or(0.0);
  out.margin("max_regret", regret);
  out.margin("sampling_scale", 1.0 / std::sqrt(static_cast<double>(r.N)));
  out.notes.push_back(
      "finite-N stand-in for a continuum realization; deviations of order N^{-1/2} are "
      "expected and the tolerance must absorb them");
  const bool ok = out.parts[0].passed() && out.parts[1].passed();
  out.verdict = ok ? CheckReport::Verdict::Pass : CheckReport::Verdict::Fail;
  out.message = ok ? "realized pure profile passes the equilibrium checks"
                   : "realized pure profile fails an equilibrium check";
  for (const auto& p : out.parts) {
    out.witnesses.insert(out.witnesses.end(), p.witnesses.begin(), p.witnesses.end());
  }
  return out;
}

std::string realization_csv(const LargeGame& game, const Realization& r) {
  std::string s = "player_id,type_id,action\n";
  for (std::size_t i = 0; i < r.type_of.size(); ++i) {
    s += std::to_string(i) + "," + game.type(r.type_of[i]).id + "," +
         game.actions()[r.action_of[i]] + "\n";
  }
  return s;
}

std::string elln_csv(const EllnReport& rep) {
  std::string s = "N,trial,linf_error\n";
  char buf[64];
  for (const auto& row : rep.rows) {
    std::snprintf(buf, sizeof buf, "%.17g", row.linf_error);
    s += std::to_string(row.N) + "," + std::to_string(row.trial) + "," + buf + "\n";
  }
  return s;
}

}  // namespace rpe
