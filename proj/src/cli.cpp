#include "rpe/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "rpe/checkers.hpp"
#include "rpe/errors.hpp"
#include "rpe/network.hpp"
#include "rpe/simulate.hpp"
#include "rpe/solvers.hpp"
#include "rpe/version.hpp"

namespace rpe {

namespace {

using json = nlohmann::ordered_json;

struct RunConfig {
  std::string command;
  std::string input;
  std::vector<std::string> epsilon;  // as given; fractions allowed
  std::string schedule = "1..200";
  std::size_t grid = kDefaultDominanceGrid;
  double tol = kDefaultCheckTol;
  std::uint64_t seed = kDefaultMcSeed;
  std::size_t mc_samples = kDefaultMcSamples;
  std::string out_dir;
  std::string format = "json";
  std::string profile;
  std::vector<std::string> checks;
  std::size_t n = 100000;
  std::size_t trials = 20;
  std::vector<std::size_t> elln;

  json to_json() const {
    json j;
    j["command"] = command;
    j["input"] = input;
    j["epsilon"] = epsilon;
    j["schedule"] = schedule;
    j["grid"] = grid;
    j["tol"] = tol;
    j["seed"] = seed;
    j["mc_samples"] = mc_samples;
    j["out"] = out_dir;
    j["format"] = format;
    j["profile"] = profile;
    j["checks"] = checks;
    j["n"] = n;
    j["trials"] = trials;
    j["elln"] = elln;
    return j;
  }
};

struct Output {
  json doc;
  std::string csv;                                    // body for --format csv
  std::vector<std::pair<std::string, std::string>> files;  // extra CSV files for --out
  int code = kExitOk;
};

EpsSchedule parse_schedule(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) throw PreconditionError("schedule must look like n0..n1");
  try {
    const auto n0 = std::stoul(s.substr(0, dots));
    const auto n1 = std::stoul(s.substr(dots + 2));
    return EpsSchedule::sixth(n0, n1);
  } catch (const std::logic_error&) {
    throw PreconditionError("schedule must look like n0..n1, got '" + s + "'");
  }
}

std::vector<double> parse_eps_list(const std::vector<std::string>& v,
                                   std::vector<double> fallback) {
  if (v.empty()) return fallback;
  std::vector<double> out;
  for (const auto& s : v) {
    const double e = parse_fraction(s);
    if (!(e > 0.0 && e < 1.0)) throw PreconditionError("epsilon must lie in (0, 1)");
    out.push_back(e);
  }
  return out;
}

json report_value(const CheckReport& r) { return json::parse(report_to_json(r, -1)); }

json distribution_json(const LargeGame& game, const ActionDistribution& d) {
  json j = json::object();
  for (std::size_t a = 0; a < d.size(); ++a) j[game.actions()[a]] = d[a];
  return j;
}

json profile_json(const LargeGame& game, const RandomizedProfile& h) {
  json j = json::object();
  for (std::size_t t = 0; t < h.h.size(); ++t) j[game.type(t).id] = h.h[t].vec();
  return j;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Input {
  std::optional<CongestionNetwork> net;
  std::optional<GameFile> file;
  const LargeGame& game() const { return file->game; }
};

Input load_input(const std::string& path) {
  const std::string text = read_text_file(path);
  Input in;
  if (looks_like_network(text)) {
    in.net = parse_network(text, path);
    in.file = GameFile{as_large_game(*in.net), {}};
  } else {
    in.file = parse_game(text, path);
  }
  return in;
}

CongestionNetwork require_network(const Input& in, const std::string& cmd) {
  if (!in.net) throw PreconditionError(cmd + " needs a network file");
  return *in.net;
}

int combine(int code, const CheckReport& r) {
  if (code != kExitOk) return code;
  return r.passed() ? kExitOk : kExitCheckFailed;
}

// --- commands ---------------------------------------------------------------

Output cmd_wardrop(const RunConfig& cfg) {
  const auto in = load_input(cfg.input);
  const auto net = require_network(in, "wardrop");
  BeckmannOptions bo;
  const auto r = solve_beckmann(net, 0.0, bo);
  const auto costs = net.path_costs(r.flow.weights());
  const double cmin = *std::min_element(costs.begin(), costs.end());
  Output o;
  json paths = json::array();
  std::vector<std::string> tied;
  bool wardrop = true;
  std::string csv = "path,flow,cost,used,tied\n";
  for (std::size_t p = 0; p < net.num_paths(); ++p) {
    const bool is_used = r.flow[p] > 1e-6;
    const bool is_tied = costs[p] - cmin <= 1e-7;
    if (is_tied) tied.push_back(net.path_name(p));
    if (is_used && costs[p] - cmin > 1e-6) wardrop = false;
    paths.push_back({{"path", net.path_name(p)},
                     {"flow", r.flow[p]},
                     {"cost", costs[p]},
                     {"used", is_used},
                     {"tied_at_minimum", is_tied}});
    csv += net.path_name(p) + "," + num(r.flow[p]) + "," + num(costs[p]) + "," +
           (is_used ? "1" : "0") + "," + (is_tied ? "1" : "0") + "\n";
  }
  // The flow is one of many when shifting a little flow between tied paths
  // keeps every used path at the minimum cost.
  auto still_wardrop = [&](const std::vector<double>& y) {
    const auto c = net.path_costs(y);
    const double m = *std::min_element(c.begin(), c.end());
    for (std::size_t p = 0; p < y.size(); ++p) {
      if (y[p] > 1e-12 && c[p] - m > 1e-9) return false;
    }
    return true;
  };
  std::vector<std::string> shifts;
  for (std::size_t p = 0; p < net.num_paths(); ++p) {
    if (r.flow[p] <= 1e-6 || costs[p] - cmin > 1e-7) continue;
    for (std::size_t q = 0; q < net.num_paths(); ++q) {
      if (q == p || costs[q] - cmin > 1e-7) continue;
      auto y = r.flow.vec();
      const double d = std::min(1e-3, y[p]);
      y[p] -= d;
      y[q] += d;
      if (still_wardrop(y)) shifts.push_back(net.path_name(p) + "->" + net.path_name(q));
    }
  }
  json res;
  res["flow"] = r.flow.vec();
  res["paths"] = paths;
  res["social_cost"] = net.social_cost(r.flow.weights());
  res["min_path_cost"] = cmin;
  res["wardrop_conditions"] = wardrop;
  res["stationarity_residual"] = r.residual;
  res["iterations"] = r.iterations;
  res["strictly_increasing_costs"] = net.all_strictly_increasing();
  res["unique_flow"] = shifts.empty();
  if (!shifts.empty()) {
    std::string names;
    for (const auto& t : tied) names += (names.empty() ? "" : ", ") + t;
    res["equilibrium_family"] = "paths " + names +
                                " tie at the solution and flow can move between them (" +
                                shifts.front() +
                                ") without breaking the Wardrop conditions; the solved flow is "
                                "one member of a family";
  }
  o.doc["result"] = res;
  o.csv = csv;
  o.code = wardrop ? kExitOk : kExitCheckFailed;
  return o;
}

std::string trajectory_csv(const RpeLimitResult& lim, std::size_t K) {
  std::string s = "n,epsilon";
  for (std::size_t k = 1; k <= K; ++k) s += ",coord_" + std::to_string(k);
  s += ",objective,kkt_residual\n";
  for (const auto& p : lim.trajectory) {
    s += std::to_string(p.n) + "," + num(p.eps);
    for (double c : p.coords) s += "," + num(c);
    s += "," + num(p.objective) + "," + num(p.kkt_residual) + "\n";
  }
  return s;
}

std::string game_trajectory_csv(const GameLimitResult& lim, std::size_t K) {
  std::string s = "n,epsilon";
  for (std::size_t k = 1; k <= K; ++k) s += ",coord_" + std::to_string(k);
  s += ",objective,kkt_residual\n";
  // Games have no objective; the fixed-point regret stands in for the KKT column.
  for (const auto& p : lim.trajectory) {
    s += std::to_string(p.n) + "," + num(p.eps);
    for (double c : p.summary.weights()) s += "," + num(c);
    s += ",," + num(p.residual) + "\n";
  }
  return s;
}

Output cmd_rpe(const RunConfig& cfg) {
  const auto in = load_input(cfg.input);
  const LargeGame& game = in.game();
  const auto schedule = parse_schedule(cfg.schedule);
  const McConfig mc{cfg.mc_samples, cfg.seed};
  const auto family = TemplateFamily::shared(PerturbationTemplate::standard());
  Output o;
  json res;
  RandomizedProfile limit;
  RandomizedProfile last;
  double last_eps = schedule.eps.back();
  bool converged = false;
  std::vector<CheckReport> extra;

  if (in.net) {
    schedule.validate(1.0 / static_cast<double>(in.net->num_paths()));
    const auto lim = rpe_limit(*in.net, schedule);
    limit = RandomizedProfile::symmetric(game, lim.limit);
    last = RandomizedProfile::symmetric(game, lim.final_iterate);
    converged = lim.cauchy_residual <= 1e-3;
    res["kind"] = "congestion";
    res["limit"] = lim.limit.vec();
    res["limit_method"] = lim.limit_method;
    res["final_iterate"] = lim.final_iterate.vec();
    res["cauchy_residual"] = lim.cauchy_residual;
    res["strictly_increasing_costs"] = lim.strictly_increasing;
    res["unique_limit"] = lim.unique_limit;
    res["paths"] = in.net->path_names();
    o.files.emplace_back("trajectory.csv", trajectory_csv(lim, in.net->num_paths()));
    o.csv = o.files.back().second;
  } else {
    GameLimitOptions go;
    go.fixed_point.mc = mc;
    std::optional<RandomizedProfile> target;
    if (!cfg.profile.empty()) {
      target = resolve_profile(*in.file, cfg.profile);
      go.fixed_point.start = *target;
    }
    const auto lim = rpe_limit_game(game, schedule, family, go);
    limit = lim.limit;
    last = lim.trajectory.back().h;
    converged = lim.converged;
    res["kind"] = "game";
    res["limit"] = profile_json(game, lim.limit);
    res["limit_summary"] = distribution_json(game, lim.limit_summary);
    res["limit_method"] = lim.limit_method;
    res["profile_cauchy"] = lim.profile_cauchy;
    res["summary_cauchy"] = lim.summary_cauchy;
    const double mw = lim.limit_summary.min_weight();
    res["limit_on_boundary"] = mw <= 1e-6;
    if (target) {
      // Both the per-type limits and the summary limit must equal the target.
      CheckReport t;
      t.check = "limit-matches-profile";
      t.echo("profile", cfg.profile);
      double dist = 0.0;
      for (std::size_t i = 0; i < game.num_types(); ++i) {
        dist = std::max(dist, linf_distance(limit.h[i].weights(), target->h[i].weights()));
      }
      const double sdist = linf_distance(lim.limit_summary.weights(),
                                         societal_summary(game, *target).weights());
      t.margin("profile_distance", dist);
      t.margin("summary_distance", sdist);
      const bool ok = dist <= 1e-3 && sdist <= 1e-3;
      t.verdict = ok ? CheckReport::Verdict::Pass : CheckReport::Verdict::Fail;
      t.message = ok ? "the eps-RPE trajectory converges to the given profile"
                     : "the eps-RPE trajectory started at the profile converges elsewhere: the "
                       "per-type limit condition (ii) and summary limit condition (iii) fail";
      if (!ok) {
        t.witnesses.push_back({"", "", "", lim.limit_summary.vec(),
                               societal_summary(game, *target).vec(), sdist,
                               "point: limit summary; mixture: profile summary"});
      }
      extra.push_back(t);
    }
    o.files.emplace_back("trajectory.csv", game_trajectory_csv(lim, game.num_actions()));
    o.csv = o.files.back().second;
  }
  res["converged"] = converged;
  res["epsilon_last"] = last_eps;

  const PerturbedEvaluator ev(game, mc);
  std::vector<CheckReport> reports;
  reports.push_back(check_nash(game, limit, cfg.tol));
  reports.push_back(check_admissible(game, limit, {cfg.grid, kDefaultDominanceTol, true}));
  reports.push_back(check_eps_rpe(ev, last, last_eps, family, {1.0, cfg.tol, mc}));
  reports.back().notes.push_back("run on the eps-RPE at the last schedule entry");
  SearchOptions so;
  so.certificate.tol = cfg.tol;
  so.certificate.mc = mc;
  reports.push_back(search_perturbation_certificate(game, limit, so));
  for (auto& e : extra) reports.push_back(std::move(e));

  int code = kExitOk;
  json checks = json::array();
  for (const auto& r : reports) {
    code = combine(code, r);
    checks.push_back(report_value(r));
  }
  o.doc["result"] = res;
  o.doc["checks"] = checks;
  o.code = converged ? code : kExitNotConverged;
  return o;
}

Output cmd_check(const RunConfig& cfg) {
  const auto in = load_input(cfg.input);
  const LargeGame& game = in.game();
  if (cfg.profile.empty()) throw PreconditionError("check needs --profile");
  const auto h = resolve_profile(*in.file, cfg.profile);
  const McConfig mc{cfg.mc_samples, cfg.seed};
  const auto family = TemplateFamily::shared(PerturbationTemplate::standard());
  std::set<std::string> want(cfg.checks.begin(), cfg.checks.end());
  const bool all = want.empty() || want.count("all");
  auto on = [&](const char* name) { return all || want.count(name) > 0; };

  std::vector<CheckReport> reports;
  if (on("nash")) reports.push_back(check_nash(game, h, cfg.tol));
  if (on("admissible")) {
    reports.push_back(check_admissible(game, h, {cfg.grid, kDefaultDominanceTol, true}));
  }
  if (on("eps-rpe")) {
    const auto eps_list = parse_eps_list(cfg.epsilon, {0.1, 0.05, 0.025, 0.0125});
    const PerturbedEvaluator ev(game, mc);
    if (h.full_support()) {
      for (double e : eps_list) reports.push_back(check_eps_rpe(ev, h, e, family, {1.0, cfg.tol, mc}));
    } else {
      // h itself cannot be an eps-RPE. Look for eps-RPEs near h by running the
      // fixed point from h and measuring how far it lands.
      CheckReport agg;
      agg.check = "eps-rpe-near-profile";
      agg.notes.push_back(
          "the profile is not full support, so eps-RPEs are computed by the fixed point started "
          "at the profile and compared with it");
      bool ok = true;
      double last_dist = 0.0;
      for (double e : eps_list) {
        FixedPointOptions fo;
        fo.mc = mc;
        fo.start = h;
        const auto fp = fixed_point_eps_rpe(ev, e, family, fo);
        auto rep = check_eps_rpe(ev, fp.h, e, family, {1.0, cfg.tol, mc});
        double dist = 0.0;
        for (std::size_t t = 0; t < game.num_types(); ++t) {
          dist = std::max(dist, linf_distance(fp.h.h[t].weights(), h.h[t].weights()));
        }
        last_dist = dist;
        rep.margin("distance_to_profile", dist);
        rep.margin("summary_min_coordinate", fp.summary.min_weight());
        const bool near = dist <= 0.05 + 2.0 * e;
        if (!near) {
          rep.verdict = CheckReport::Verdict::Fail;
          rep.message = "the eps-RPE reached from the profile is " + num(dist) + " away from it";
          rep.witnesses.push_back({"", "", "", fp.summary.vec(), {}, dist,
                                   "summary of the eps-RPE reached from the profile"});
        }
        ok = ok && rep.passed();
        agg.parts.push_back(std::move(rep));
      }
      agg.margin("distance_at_smallest_eps", last_dist);
      ok = ok && last_dist <= 0.05;
      agg.verdict = ok ? CheckReport::Verdict::Pass : CheckReport::Verdict::Fail;
      agg.message = ok ? "eps-RPEs close to the profile exist at every tested eps"
                       : "no eps-RPE close to the profile was found at some tested eps";
      reports.push_back(std::move(agg));
    }
  }
  if (on("certificate")) {
    SearchOptions so;
    so.certificate.tol = cfg.tol;
    so.certificate.mc = mc;
    reports.push_back(search_perturbation_certificate(game, h, so));
  }
  if (want.count("potential") || (all && in.net)) {
    if (in.net) {
      reports.push_back(check_potential(game, negative_path_cost_exprs(*in.net), 30, 1e-9));
    } else {
      reports.push_back(find_potential(game, 30, 1e-9).report);
    }
  }
  Output o;
  json checks = json::array();
  std::string csv = "check,verdict,message\n";
  for (const auto& r : reports) {
    o.code = combine(o.code, r);
    checks.push_back(report_value(r));
    csv += r.check + "," + to_string(r.verdict) + ",\"" + r.message + "\"\n";
  }
  o.doc["result"] = {{"profile", profile_json(game, h)},
                     {"summary", distribution_json(game, societal_summary(game, h))}};
  o.doc["checks"] = checks;
  o.csv = csv;
  return o;
}

Output cmd_simulate(const RunConfig& cfg) {
  const auto in = load_input(cfg.input);
  const LargeGame& game = in.game();
  RandomizedProfile h;
  std::string source;
  if (!cfg.profile.empty()) {
    h = resolve_profile(*in.file, cfg.profile);
    source = cfg.profile;
  } else if (in.file->named_profiles.count("g0")) {
    h = in.file->named_profiles.at("g0");
    source = "g0";
  } else if (!in.file->named_profiles.empty()) {
    h = in.file->named_profiles.begin()->second;
    source = in.file->named_profiles.begin()->first;
  } else if (in.net) {
    h = RandomizedProfile::symmetric(game, rpe_limit(*in.net, parse_schedule(cfg.schedule)).limit);
    source = "rpe limit";
  } else {
    throw PreconditionError("simulate needs --profile for a game without named profiles");
  }
  const auto r = sample_realization(game, h, cfg.n, cfg.seed);
  Output o;
  json res;
  res["profile_source"] = source;
  res["profile"] = profile_json(game, h);
  res["N"] = r.N;
  res["seed"] = r.seed;
  res["empirical_summary"] = distribution_json(game, r.summary);
  res["target_summary"] = distribution_json(game, societal_summary(game, h));
  res["linf_error"] = linf_distance(r.summary.weights(), societal_summary(game, h).weights());
  json counts = json::object();
  for (std::size_t t = 0; t < game.num_types(); ++t) counts[game.type(t).id] = r.counts[t];
  res["counts"] = counts;
  o.files.emplace_back("realization.csv", realization_csv(game, r));
  o.csv = o.files.back().second;
  if (!cfg.elln.empty()) {
    const auto rep = elln_report(game, h, cfg.elln, cfg.trials, cfg.seed);
    res["elln"] = {{"N", rep.Ns}, {"mean_linf_error", rep.mean_error}, {"slope", rep.slope}};
    o.files.emplace_back("elln.csv", elln_csv(rep));
  }
  if (!cfg.epsilon.empty()) {
    const double e = parse_eps_list(cfg.epsilon, {}).front();
    ExPostOptions eo;
    eo.tol = cfg.tol;
    eo.eps_rpe.mc = {cfg.mc_samples, cfg.seed};
    const auto rep = ex_post_check(game, r, e,
                                   TemplateFamily::shared(PerturbationTemplate::standard()), eo);
    o.doc["checks"] = json::array({report_value(rep)});
    o.code = combine(o.code, rep);
  }
  o.doc["result"] = res;
  return o;
}

Output cmd_poa(const RunConfig& cfg) {
  const auto in = load_input(cfg.input);
  const auto net = require_network(in, "poa");
  PoaOptions po;
  po.schedule = parse_schedule(cfg.schedule);
  po.seed = cfg.seed;
  const auto r = price_of_anarchy(net, po);
  Output o;
  o.doc["result"] = {{"price_of_anarchy", r.ratio},
                     {"equilibrium_cost", r.equilibrium_cost},
                     {"optimum_cost", r.optimum_cost},
                     {"equilibrium_flow", r.equilibrium_flow.vec()},
                     {"optimum_flow", r.optimum_flow.vec()},
                     {"paths", net.path_names()},
                     {"convex", r.convex},
                     {"method", r.method}};
  o.csv = "price_of_anarchy,equilibrium_cost,optimum_cost\n" + num(r.ratio) + "," +
          num(r.equilibrium_cost) + "," + num(r.optimum_cost) + "\n";
  return o;
}

void write_atomic(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary);
    if (!f) throw ResourceError("cannot write " + tmp);
    f << text;
    if (!f) throw ResourceError("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string csv_header(const json& config) {
  return std::string("# rpe ") + kVersion + " config=" + config.dump() + "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust perfect equilibria: solvers and checkers"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("input", cfg.input, "game or network JSON file")->required();
    sub->add_option("--epsilon", cfg.epsilon, "epsilon value(s); fractions such as 1/60 allowed");
    sub->add_option("--schedule", cfg.schedule, "eps_n = 1/(6n) for n in n0..n1");
    sub->add_option("--grid", cfg.grid, "dominance grid resolution m")->check(CLI::Range(2, 100000));
    sub->add_option("--tol", cfg.tol, "check tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--mc-samples", cfg.mc_samples, "Monte Carlo samples for eta-integrals")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out_dir, "directory for report and CSV files");
    sub->add_option("--format", cfg.format, "stdout format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--profile", cfg.profile,
                    "named profile, profile JSON file, 'w1,w2,..', or 'type=w..;type=w..'");
  };
  auto* wardrop = app.add_subcommand("wardrop", "Wardrop equilibrium of a network");
  auto* rpe = app.add_subcommand("rpe", "robust perfect equilibrium limit and checks");
  auto* check = app.add_subcommand("check", "run checkers on a profile");
  auto* simulate = app.add_subcommand("simulate", "sample a finite population");
  auto* poa = app.add_subcommand("poa", "price of anarchy of a network");
  for (auto* s : {wardrop, rpe, check, simulate, poa}) common(s);
  for (const char* name : {"nash", "admissible", "eps-rpe", "certificate", "potential", "all"}) {
    check->add_flag_callback(std::string("--") + name,
                             [&cfg, name] { cfg.checks.emplace_back(name); });
  }
  simulate->add_option("--n", cfg.n, "population size")->check(CLI::PositiveNumber);
  simulate->add_option("--trials", cfg.trials, "ELLN trials per size")->check(CLI::PositiveNumber);
  simulate->add_option("--elln", cfg.elln, "population sizes for the ELLN table")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInputError;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  Output o;
  try {
    if (cfg.command == "wardrop") o = cmd_wardrop(cfg);
    else if (cfg.command == "rpe") o = cmd_rpe(cfg);
    else if (cfg.command == "check") o = cmd_check(cfg);
    else if (cfg.command == "simulate") o = cmd_simulate(cfg);
    else o = cmd_poa(cfg);
  } catch (const SolverError& e) {
    err << "solver did not converge: " << e.what() << " (residual " << e.residual() << ")\n";
    return kExitNotConverged;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  json doc;
  doc["tool"] = "rpe";
  doc["version"] = kVersion;
  doc["config"] = cfg.to_json();
  for (auto& [k, v] : o.doc.items()) doc[k] = v;
  doc["exit_code"] = o.code;
  const std::string header = csv_header(doc["config"]);

  try {
    if (!cfg.out_dir.empty()) {
      std::filesystem::create_directories(cfg.out_dir);
      const std::filesystem::path dir(cfg.out_dir);
      write_atomic(dir / "report.json", doc.dump(2) + "\n");
      for (const auto& [name, body] : o.files) write_atomic(dir / name, header + body);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  if (cfg.format == "csv") {
    out << header << o.csv;
  } else {
    out << doc.dump(2) << "\n";
  }
  return o.code;
}

}  // namespace rpe
