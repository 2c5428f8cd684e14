#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rpe/checkers.hpp"
#include "rpe/game.hpp"

namespace rpe {

/// A finite population drawn from a randomized profile.
struct Realization {
  std::size_t N = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> type_of;    // per player
  std::vector<std::size_t> action_of;  // per player
  std::vector<std::vector<std::size_t>> counts;  // [type][action]
  ActionDistribution summary;          // action counts / N
};

/// Players per type by largest-remainder apportionment of mass * N.
std::vector<std::size_t> apportion(const LargeGame& game, std::size_t N);

/// Each player draws an action independently from h(type); deterministic per seed.
Realization sample_realization(const LargeGame& game, const RandomizedProfile& h, std::size_t N,
                               std::uint64_t seed);

struct EllnRow {
  std::size_t N = 0;
  std::size_t trial = 0;
  double linf_error = 0.0;
};

struct EllnReport {
  std::vector<EllnRow> rows;
  std::vector<std::size_t> Ns;
  std::vector<double> mean_error;  // per N
  double slope = 0.0;              // least-squares slope of log mean error on log N
  std::uint64_t seed = 0;
  std::size_t trials = 0;
};

/// Trial i at size N uses the stream derived from (seed, N, i).
EllnReport elln_report(const LargeGame& game, const RandomizedProfile& h,
                       const std::vector<std::size_t>& Ns, std::size_t trials,
                       std::uint64_t seed);

struct ExPostOptions {
  double tol = 1e-9;
  EpsRpeOptions eps_rpe;
};

/// Treats each (type, action) cell of the realization as a type of its own
/// playing that action, then runs check_nash on it and check_eps_rpe on the
/// eps-trembled cells (1 - eps) delta_a + eps nu.
CheckReport ex_post_check(const LargeGame& game, const Realization& r, double eps,
                          const TemplateFamily& family, const ExPostOptions& opts = {});

/// CSV `player_id,type_id,action`.
std::string realization_csv(const LargeGame& game, const Realization& r);
/// CSV `N,trial,linf_error`.
std::string elln_csv(const EllnReport& rep);

}  // namespace rpe
