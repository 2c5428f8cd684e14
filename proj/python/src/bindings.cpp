#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rpe/checkers.hpp"
#include "rpe/cli.hpp"
#include "rpe/errors.hpp"
#include "rpe/simulate.hpp"
#include "rpe/solvers.hpp"
#include "rpe/version.hpp"

namespace py = pybind11;
using namespace rpe;

namespace {

using Rows = std::vector<std::vector<double>>;

RandomizedProfile to_profile(const LargeGame& g, const Rows& rows) {
  RandomizedProfile h;
  if (rows.size() == 1 && g.num_types() > 1) {
    return RandomizedProfile::symmetric(g, ActionDistribution(rows[0]));
  }
  for (const auto& r : rows) h.h.emplace_back(r);
  return h;
}

Rows from_profile(const RandomizedProfile& h) {
  Rows out;
  for (const auto& d : h.h) out.push_back(d.vec());
  return out;
}

py::object report(const CheckReport& r) {
  return py::module_::import("json").attr("loads")(report_to_json(r, -1));
}

TemplateFamily family_or_standard(const std::optional<TemplateFamily>& f) {
  return f ? *f : TemplateFamily::shared(PerturbationTemplate::standard());
}

}  // namespace

PYBIND11_MODULE(_rpekit, m) {
  m.doc() = "Robust perfect equilibria of large games";
  m.attr("__version__") = kVersion;

  // Later registrations are tried first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<LookupError>(m, "LookupError", PyExc_KeyError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  // simplex
  m.def("project_truncated",
        [](const std::vector<double>& x, double floor) { return project_truncated(x, floor).vec(); },
        py::arg("x"), py::arg("floor"));
  m.def("uniform_samples",
        [](std::size_t K, std::size_t n, std::uint64_t seed) {
          Rows out;
          for (const auto& p : uniform_samples(K, n, seed)) out.push_back(p.vec());
          return out;
        },
        py::arg("K"), py::arg("n"), py::arg("seed"));
  m.def("beta_marginal_expectation",
        [](const std::function<double(double)>& c, std::size_t k, std::size_t K, std::size_t nodes,
           const std::vector<double>& breakpoints) {
          return beta_marginal_expectation(c, k, K, nodes, breakpoints);
        },
        py::arg("c"), py::arg("k"), py::arg("K"), py::arg("nodes") = kDefaultQuadratureNodes,
        py::arg("breakpoints") = std::vector<double>{});
  m.def("simplex_grid",
        [](std::size_t K, std::size_t mres) {
          Rows out;
          for (const auto& p : simplex_grid(K, mres)) out.push_back(p.vec());
          return out;
        },
        py::arg("K"), py::arg("m"));

  // games
  py::class_<PerturbationTemplate>(m, "PerturbationTemplate")
      .def_static("standard", &PerturbationTemplate::standard)
      .def_static("vertex_mix",
                  [](std::size_t K, const std::vector<double>& w, double u) {
                    return PerturbationTemplate::vertex_mix(K, w, u);
                  },
                  py::arg("K"), py::arg("vertex_weights"), py::arg("uniform_weight"));
  py::class_<TemplateFamily>(m, "TemplateFamily")
      .def_static("shared", &TemplateFamily::shared)
      .def(py::init([](std::vector<PerturbationTemplate> per_type) {
        return TemplateFamily{std::move(per_type)};
      }));

  py::class_<GameFile>(m, "Game")
      .def_property_readonly("actions", [](const GameFile& f) { return f.game.actions(); })
      .def_property_readonly("types",
                             [](const GameFile& f) {
                               std::vector<std::pair<std::string, double>> out;
                               for (const auto& t : f.game.types()) out.emplace_back(t.id, t.mass);
                               return out;
                             })
      .def_property_readonly("named_profiles",
                             [](const GameFile& f) {
                               std::map<std::string, Rows> out;
                               for (const auto& [k, v] : f.named_profiles) out[k] = from_profile(v);
                               return out;
                             })
      .def("payoff",
           [](const GameFile& f, const std::string& type, const std::string& action,
              const std::vector<double>& tau) {
             return eval_payoff(f.game, type, action, ActionDistribution(tau));
           },
           py::arg("type"), py::arg("action"), py::arg("tau"))
      .def("profile",
           [](const GameFile& f, const std::string& arg) { return from_profile(resolve_profile(f, arg)); },
           py::arg("text"))
      .def("summary",
           [](const GameFile& f, const Rows& h) {
             return societal_summary(f.game, to_profile(f.game, h)).vec();
           },
           py::arg("profile"))
      .def("to_json", [](const GameFile& f) { return game_to_json(f.game); });
  m.def("load_game", &load_game, py::arg("path"));
  m.def("parse_game", [](const std::string& text) { return parse_game(text); }, py::arg("text"));

  // networks
  py::class_<CongestionNetwork>(m, "Network")
      .def_property_readonly("paths", &CongestionNetwork::path_names)
      .def("path_costs", &CongestionNetwork::path_costs, py::arg("flow"))
      .def("social_cost", &CongestionNetwork::social_cost, py::arg("flow"))
      .def("as_game", [](const CongestionNetwork& n) { return GameFile{as_large_game(n), {}}; });
  m.def("load_network", [](const std::string& p) { return load_network(p); }, py::arg("path"));

  m.def("solve_beckmann",
        [](const CongestionNetwork& n, double eps, double tol) {
          BeckmannOptions o;
          o.tol = tol;
          const auto r = solve_beckmann(n, eps, o);
          py::dict d;
          d["flow"] = r.flow.vec();
          d["objective"] = r.objective;
          d["residual"] = r.residual;
          d["iterations"] = r.iterations;
          return d;
        },
        py::arg("network"), py::arg("eps"), py::arg("tol") = 1e-12);
  m.def("verify_kkt",
        [](const CongestionNetwork& n, double eps, const std::vector<double>& flow, double tol) {
          const auto k = verify_kkt(n, eps, ActionDistribution(flow), tol);
          py::dict d;
          d["verdict"] = std::string(to_string(k.verdict));
          d["max_residual"] = k.max_residual;
          d["lambda"] = k.lambda;
          d["mu"] = k.mu;
          return d;
        },
        py::arg("network"), py::arg("eps"), py::arg("flow"), py::arg("tol") = 1e-9);
  m.def("rpe_limit",
        [](const CongestionNetwork& n, std::size_t n0, std::size_t n1) {
          const auto r = rpe_limit(n, EpsSchedule::sixth(n0, n1));
          py::dict d;
          d["limit"] = r.limit.vec();
          d["final_iterate"] = r.final_iterate.vec();
          d["method"] = r.limit_method;
          d["cauchy"] = r.cauchy;
          d["cauchy_residual"] = r.cauchy_residual;
          d["unique_limit"] = r.unique_limit;
          return d;
        },
        py::arg("network"), py::arg("n0") = 1, py::arg("n1") = 200);
  m.def("price_of_anarchy",
        [](const CongestionNetwork& n) {
          const auto r = price_of_anarchy(n);
          py::dict d;
          d["ratio"] = r.ratio;
          d["equilibrium_cost"] = r.equilibrium_cost;
          d["optimum_cost"] = r.optimum_cost;
          d["equilibrium_flow"] = r.equilibrium_flow.vec();
          d["optimum_flow"] = r.optimum_flow.vec();
          return d;
        },
        py::arg("network"));
  m.def("fixed_point_eps_rpe",
        [](const GameFile& f, double eps, std::optional<TemplateFamily> fam) {
          const auto r = fixed_point_eps_rpe(f.game, eps, family_or_standard(fam));
          py::dict d;
          d["profile"] = from_profile(r.h);
          d["summary"] = r.summary.vec();
          d["residual"] = r.residual;
          return d;
        },
        py::arg("game"), py::arg("eps"), py::arg("family") = std::nullopt);

  // checkers
  m.def("check_nash",
        [](const GameFile& f, const Rows& h, double tol) {
          return report(check_nash(f.game, to_profile(f.game, h), tol));
        },
        py::arg("game"), py::arg("profile"), py::arg("tol") = kDefaultCheckTol);
  m.def("check_admissible",
        [](const GameFile& f, const Rows& h, std::size_t grid, double tol) {
          return report(check_admissible(f.game, to_profile(f.game, h), {grid, tol, true}));
        },
        py::arg("game"), py::arg("profile"), py::arg("grid") = kDefaultDominanceGrid,
        py::arg("tol") = kDefaultDominanceTol);
  m.def("check_eps_rpe",
        [](const GameFile& f, const Rows& h, double eps, std::optional<TemplateFamily> fam,
           double tol) {
          EpsRpeOptions o;
          o.tol = tol;
          return report(check_eps_rpe(f.game, to_profile(f.game, h), eps, family_or_standard(fam), o));
        },
        py::arg("game"), py::arg("profile"), py::arg("eps"), py::arg("family") = std::nullopt,
        py::arg("tol") = kDefaultCheckTol);
  m.def("check_certificate",
        [](const GameFile& f, const Rows& h, const TemplateFamily& fam) {
          return report(check_aggregate_robustness_certificate(f.game, to_profile(f.game, h), fam));
        },
        py::arg("game"), py::arg("profile"), py::arg("family"));
  m.def("search_certificate",
        [](const GameFile& f, const Rows& h) {
          return report(search_perturbation_certificate(f.game, to_profile(f.game, h)));
        },
        py::arg("game"), py::arg("profile"));
  m.def("find_potential",
        [](const GameFile& f, std::size_t grid, double tol) {
          return report(find_potential(f.game, grid, tol).report);
        },
        py::arg("game"), py::arg("grid") = 30, py::arg("tol") = 1e-9);

  // simulation
  m.def("sample_summary",
        [](const GameFile& f, const Rows& h, std::size_t N, std::uint64_t seed) {
          return sample_realization(f.game, to_profile(f.game, h), N, seed).summary.vec();
        },
        py::arg("game"), py::arg("profile"), py::arg("N"), py::arg("seed"));
  m.def("elln_report",
        [](const GameFile& f, const Rows& h, const std::vector<std::size_t>& Ns,
           std::size_t trials, std::uint64_t seed) {
          const auto r = elln_report(f.game, to_profile(f.game, h), Ns, trials, seed);
          py::dict d;
          d["N"] = r.Ns;
          d["mean_error"] = r.mean_error;
          d["slope"] = r.slope;
          return d;
        },
        py::arg("game"), py::arg("profile"), py::arg("Ns"), py::arg("trials") = 20,
        py::arg("seed") = kDefaultMcSeed);

  m.def("run_cli",
        [](const std::vector<std::string>& args) {
          std::vector<std::string> full{"rpe"};
          full.insert(full.end(), args.begin(), args.end());
          std::vector<const char*> argv;
          for (const auto& a : full) argv.push_back(a.c_str());
          std::ostringstream out, err;
          const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
          return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
