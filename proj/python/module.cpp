#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mfglq/config_io.hpp"
#include "mfglq/fixed_point.hpp"
#include "mfglq/nash.hpp"

namespace py = pybind11;
using namespace mfglq;

namespace {

// Configurations cross the boundary as plain dicts in the JSON file layout.
GameConfig to_config(const py::object& obj) {
  const auto text = py::module_::import("json").attr("dumps")(obj).cast<std::string>();
  return config_from_json(nlohmann::json::parse(text));
}

py::object to_dict(const GameConfig& cfg) {
  return py::module_::import("json").attr("loads")(config_to_json(cfg).dump());
}

py::array_t<double> stack(const std::vector<Mat>& s) {
  const auto r = s.empty() ? 0 : s[0].rows(), c = s.empty() ? 0 : s[0].cols();
  py::array_t<double> a({static_cast<py::ssize_t>(s.size()), static_cast<py::ssize_t>(r), static_cast<py::ssize_t>(c)});
  auto v = a.mutable_unchecked<3>();
  for (std::size_t j = 0; j < s.size(); ++j)
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index k = 0; k < c; ++k) v(j, i, k) = s[j](i, k);
  return a;
}

py::array_t<double> stack(const std::vector<Vec>& s) {
  const auto r = s.empty() ? 0 : s[0].size();
  py::array_t<double> a({static_cast<py::ssize_t>(s.size()), static_cast<py::ssize_t>(r)});
  auto v = a.mutable_unchecked<2>();
  for (std::size_t j = 0; j < s.size(); ++j)
    for (Eigen::Index i = 0; i < r; ++i) v(j, i) = s[j](i);
  return a;
}

py::object slope(const SlopeFit& s) {
  if (s.exact) return py::str("exact");
  if (s.slope) return py::float_(*s.slope);
  return py::none();
}

py::dict mean_se_dict(const MeanSe& m) {
  py::dict d;
  d["mean"] = m.mean;
  d["se"] = m.se;
  return d;
}

py::dict limit(const py::object& cfg_obj) {
  const auto cfg = to_config(cfg_obj);
  const auto pipe = build_decentralized(cfg);
  py::dict d;
  d["t"] = cfg.grid.times();
  d["P"] = stack(pipe.sols.P);
  d["K"] = stack(pipe.sols.K);
  d["Pi"] = stack(pipe.sols.Pi);
  d["S"] = stack(pipe.sols.S);
  d["M"] = stack(pipe.sols.M);
  d["phi"] = stack(pipe.off.phi);
  d["psi"] = stack(pipe.off.psi);
  d["positivity"] = check_positivity(pipe.sols).pass();
  return d;
}

py::dict finite_n(const py::object& cfg_obj, int N) {
  const auto cfg = to_config(cfg_obj);
  const auto sols = solve_finite_N(cfg, N);
  const auto off = solve_finite_N_phi_psi(cfg, sols);
  py::dict d;
  d["t"] = cfg.grid.times();
  d["N"] = N;
  d["P"] = stack(sols.P);
  d["K"] = stack(sols.K);
  d["Pi"] = stack(sols.Pi);
  d["S"] = stack(sols.S);
  d["M"] = stack(sols.M);
  d["phi"] = stack(off.phi);
  d["psi"] = stack(off.psi);
  return d;
}

py::dict gains(const py::object& cfg_obj, const std::string& kind, int N) {
  const auto cfg = to_config(cfg_obj);
  GainSchedule g;
  if (kind == "decentralized") {
    g = build_decentralized(cfg).gains;
  } else if (kind == "centralized") {
    const auto sols = solve_finite_N(cfg, N > 0 ? N : cfg.dims.N);
    g = centralized_gains(sols, solve_finite_N_phi_psi(cfg, sols));
  } else if (kind == "fixed-point") {
    g = fixed_point_gains(solve_cc_system(cfg));
  } else {
    throw py::value_error("kind must be decentralized, centralized or fixed-point");
  }
  py::dict d;
  d["kind"] = to_string(g.kind);
  d["self_gain"] = stack(g.self_gain);
  d["mf_gain"] = stack(g.mf_gain);
  d["offset"] = stack(g.offset);
  return d;
}

py::dict simulate(const py::object& cfg_obj, int N, std::uint64_t seed, std::uint64_t scenario) {
  auto cfg = to_config(cfg_obj);
  if (N > 0) cfg.dims.N = N;
  const auto pipe = build_decentralized(cfg);
  const auto b = simulate_decentralized(cfg, pipe.gains, make_noise(cfg.grid, cfg.dims.N, seed, scenario),
                                        sample_initials(cfg.initial, cfg.dims.N, seed, scenario));
  py::dict d;
  d["t"] = cfg.grid.times();
  d["states"] = stack(b.states);
  d["controls"] = stack(b.controls);
  d["average"] = stack(b.average);
  d["mean_field"] = stack(b.mean_field);
  d["aux_states"] = stack(b.aux_states);
  d["aux_average"] = stack(b.aux_average);
  d["agent0_cost"] = path_cost(cfg, b.states, b.controls, b.average, 0).total();
  return d;
}

py::dict identity(const py::object& cfg_obj, double fault) {
  const auto cfg = to_config(cfg_obj);
  const auto pipe = build_decentralized(cfg);
  const auto r = compare_methods(pipe.sols, pipe.off, solve_cc_system(cfg, {fault}));
  py::dict d;
  d["P"] = r.P;
  d["K"] = r.K;
  d["phi"] = r.phi;
  d["self_gain"] = r.self_gain;
  d["mf_gain"] = r.mf_gain;
  d["offset"] = r.offset;
  d["positivity_agree"] = r.positivity_agree;
  d["pass"] = r.pass;
  return d;
}

py::dict gap_study(const py::object& cfg_obj, const std::vector<int>& N_list) {
  const auto rep = asymptotic_gap_study(to_config(cfg_obj), N_list);
  py::list rows;
  for (const auto& r : rep.rows) {
    py::dict row;
    row["N"] = r.N;
    row["solved"] = r.solved;
    row["P"] = r.P;
    row["K"] = r.K;
    row["Pi"] = r.Pi;
    row["S"] = r.S;
    row["M"] = r.M;
    row["phi"] = r.phi;
    row["psi"] = r.psi;
    rows.append(row);
  }
  py::dict slopes;
  slopes["P"] = slope(rep.P);
  slopes["K"] = slope(rep.K);
  slopes["Pi"] = slope(rep.Pi);
  slopes["S"] = slope(rep.S);
  slopes["M"] = slope(rep.M);
  slopes["phi"] = slope(rep.phi);
  slopes["psi"] = slope(rep.psi);
  py::dict d;
  d["rows"] = rows;
  d["slopes"] = slopes;
  return d;
}

py::dict convergence(const py::object& cfg_obj, const std::vector<int>& N_list, int scenarios, std::uint64_t seed) {
  const auto rep = convergence_study(to_config(cfg_obj), N_list, scenarios, seed);
  py::list rows;
  for (const auto& r : rep.rows) {
    py::dict row;
    row["N"] = r.N;
    row["cc1"] = mean_se_dict(r.cc1);
    row["cc2"] = mean_se_dict(r.cc2);
    row["cc3"] = mean_se_dict(r.cc3);
    rows.append(row);
  }
  py::dict d;
  d["rows"] = rows;
  d["cc1"] = slope(rep.cc1);
  d["cc2"] = slope(rep.cc2);
  d["cc3"] = slope(rep.cc3);
  return d;
}

py::dict convexity(const py::object& cfg_obj, int trials, std::uint64_t seed) {
  const auto rep = convexity_probe(to_config(cfg_obj), trials, seed);
  py::dict d;
  d["samples"] = rep.samples;
  d["min_value"] = rep.min_value;
  d["pass"] = rep.pass;
  return d;
}

py::dict deviation(const py::object& cfg_obj, int N, const std::vector<double>& amplitudes, int scenarios,
                   std::uint64_t seed) {
  const auto cfg = to_config(cfg_obj);
  const auto rep = deviation_test(cfg, build_decentralized(cfg), N,
                                  {DeviationFamily::kConstant, DeviationFamily::kRamp, DeviationFamily::kFeedback},
                                  amplitudes, scenarios, seed);
  py::list pts;
  for (const auto& p : rep.points) {
    py::dict pt;
    pt["family"] = to_string(p.family);
    pt["amplitude"] = p.amplitude;
    pt["delta"] = mean_se_dict(p.delta);
    pt["gap"] = mean_se_dict(p.gap);
    pt["quadratic"] = mean_se_dict(p.quadratic);
    pts.append(pt);
  }
  py::dict d;
  d["N"] = rep.N;
  d["points"] = pts;
  d["min_delta"] = rep.min_delta;
  d["eps"] = rep.eps;
  d["eps_literal"] = rep.eps_literal;
  return d;
}

}  // namespace

PYBIND11_MODULE(mfglq, m) {
  m.doc() = "Linear-quadratic mean-field games with common noise";

  static py::exception<SolvabilityError> solvability(m, "SolvabilityError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SolvabilityError& e) {
      PyErr_SetString(solvability.ptr(), (std::string(e.what()) + " [t = " + std::to_string(e.time()) + "]").c_str());
    } catch (const ConfigError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    } catch (const PreconditionError& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def(
      "production_config",
      [](int N, int steps, std::uint64_t seed) { return to_dict(production_planning_config({}, N, steps, seed)); },
      py::arg("N") = 300, py::arg("steps") = 1000, py::arg("seed") = 42);
  m.def(
      "validate",
      [](const py::object& cfg) {
        py::dict d;
        for (const auto& c : validate_config(to_config(cfg)).clauses) d[py::str(c.name)] = c.pass;
        return d;
      },
      py::arg("config"));
  m.def("solve_limit", &limit, py::arg("config"));
  m.def("solve_finite_N", &finite_n, py::arg("config"), py::arg("N"));
  m.def("gains", &gains, py::arg("config"), py::arg("kind") = "decentralized", py::arg("N") = 0);
  m.def("simulate", &simulate, py::arg("config"), py::arg("N") = 0, py::arg("seed") = 42, py::arg("scenario") = 0);
  m.def("compare_methods", &identity, py::arg("config"), py::arg("fault_k_terminal") = 0.0);
  m.def("gap_study", &gap_study, py::arg("config"), py::arg("N_list"));
  m.def("convergence_study", &convergence, py::arg("config"), py::arg("N_list"), py::arg("scenarios") = 200,
        py::arg("seed") = 42);
  m.def("convexity_probe", &convexity, py::arg("config"), py::arg("trials") = 100, py::arg("seed") = 42);
  m.def("deviation_test", &deviation, py::arg("config"), py::arg("N"),
        py::arg("amplitudes") = std::vector<double>{-0.5, -0.25, -0.1, 0.1, 0.25, 0.5}, py::arg("scenarios") = 200,
        py::arg("seed") = 42);
}
