#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mfglq/config_io.hpp"
#include "mfglq/fixed_point.hpp"
#include "mfglq/io.hpp"
#include "mfglq/nash.hpp"
#include "mfglq/parallel.hpp"
#include "mfglq/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mfglq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitSolvability = 2;
constexpr int kExitVerification = 3;
constexpr std::uint64_t kPresetSeed = 42;

struct Run {
  std::string subcommand;
  std::string config_path;
  fs::path out;
  std::uint64_t seed = 2024;
  int N = 300;
  std::vector<int> gap_list{8, 16, 32, 64, 128, 256, 512};
  std::vector<int> n_list{25, 50, 100, 200, 400};
  std::vector<int> deviation_list{50, 100, 200, 400};
  int scenarios = 200;
  int sim_scenarios = 20;
  int steps = 0;
  double fault_k = 0.0;
  json artifacts = json::array();

  std::string file(const std::string& name) {
    const auto p = (out / name).string();
    return p;
  }
  void record(const std::string& name) {
    artifacts.push_back({{"file", name}, {"hash", file_hash(file(name))}});
  }
};

json slope_json(const SlopeFit& s) {
  json j;
  j["exact"] = s.exact;
  j["slope"] = s.slope ? json(*s.slope) : json(nullptr);
  return j;
}

json mean_se_json(const MeanSe& m) { return {{"mean", m.mean}, {"se", m.se}}; }

bool slope_in(const SlopeFit& s, double lo, double hi) { return s.slope && *s.slope >= lo && *s.slope <= hi; }

void write_json(const std::string& path, const json& j) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  os << j.dump(2) << '\n';
}

std::vector<double> scalars(const MatrixSchedule& s) {
  std::vector<double> v;
  v.reserve(s.size());
  for (const auto& m : s) v.push_back(m(0, 0));
  return v;
}

// Agents shown in the trajectory figures.
std::vector<int> plotted_agents(int N) {
  std::vector<int> a;
  const int count = std::min(N, 5);
  for (int i = 0; i < count; ++i) a.push_back(i * N / count);
  return a;
}

void cmd_riccati(const GameConfig& cfg, Run& run) {
  const auto pipe = build_decentralized(cfg);
  const auto& s = pipe.sols;
  const auto& g = cfg.grid;
  const std::vector<std::pair<std::string, const MatrixSchedule*>> unknowns{
      {"P", &s.P}, {"K", &s.K}, {"Pi", &s.Pi}, {"S", &s.S}, {"M", &s.M}};
  for (const auto& [name, sched] : unknowns) {
    const std::string f = name + "_limit.csv";
    write_schedule_csv(run.file(f), g, {{name, sched, nullptr}});
    run.record(f);
  }
  write_schedule_csv(run.file("phi_limit.csv"), g, {{"phi", nullptr, &pipe.off.phi}});
  run.record("phi_limit.csv");
  write_schedule_csv(run.file("psi_limit.csv"), g, {{"psi", nullptr, &pipe.off.psi}});
  run.record("psi_limit.csv");
  write_schedule_csv(run.file("gains_limit.csv"), g,
                     {{"self", &pipe.gains.self_gain, nullptr},
                      {"mf", &pipe.gains.mf_gain, nullptr},
                      {"offset", nullptr, &pipe.gains.offset}});
  run.record("gains_limit.csv");

  const auto fin = solve_finite_N(cfg, cfg.dims.N);
  const std::string tag = std::to_string(cfg.dims.N);
  const std::vector<std::pair<std::string, const MatrixSchedule*>> finite{
      {"P", &fin.P}, {"K", &fin.K}, {"Pi", &fin.Pi}, {"S", &fin.S}, {"M", &fin.M}};
  for (const auto& [name, sched] : finite) {
    const std::string f = name + "_" + tag + ".csv";
    write_schedule_csv(run.file(f), g, {{name, sched, nullptr}});
    run.record(f);
  }

  if (cfg.dims.n == 1) {
    write_schedule_csv(run.file("fig1_riccati.csv"), g,
                       {{"P", &s.P, nullptr}, {"K", &s.K, nullptr}, {"Pi", &s.Pi, nullptr}, {"M", &s.M, nullptr}});
    const auto t = g.times();
    write_svg_plot(run.file("fig1_riccati.svg"), "Riccati solutions P, K, Pi, M", "t",
                   {{"P", t, scalars(s.P)}, {"K", t, scalars(s.K)}, {"Pi", t, scalars(s.Pi)}, {"M", t, scalars(s.M)}});
    run.record("fig1_riccati.csv");
    run.record("fig1_riccati.svg");
  }
  const auto pos = check_positivity(s);
  std::cout << "riccati: P(0) = " << s.P[0](0, 0) << ", K(0) = " << s.K[0](0, 0)
            << ", positivity " << (pos.pass() ? "ok" : "violated") << '\n';
}

void cmd_simulate(const GameConfig& cfg, Run& run) {
  const auto pipe = build_decentralized(cfg);
  const int N = cfg.dims.N;
  const int scenarios = std::max(1, run.sim_scenarios);
  std::vector<double> cost(scenarios), sup_gap(scenarios);
  TrajectoryBundle first;
  parallel_for(scenarios, [&](int sc) {
    const auto noise = make_noise(cfg.grid, N, run.seed, static_cast<std::uint64_t>(sc));
    const auto init = sample_initials(cfg.initial, N, run.seed, static_cast<std::uint64_t>(sc));
    auto b = simulate_decentralized(cfg, pipe.gains, noise, init);
    cost[sc] = path_cost(cfg, b.states, b.controls, b.average, 0).total();
    double g = 0.0;
    for (std::size_t j = 0; j < b.average.size(); ++j) g = std::max(g, (b.average[j] - b.mean_field[j]).norm());
    sup_gap[sc] = g;
    if (sc == 0) first = std::move(b);
  });

  const auto& g = cfg.grid;
  const auto t = g.times();
  const auto agents = plotted_agents(N);
  {
    std::ofstream os(run.file("trajectories.csv"));
    os << std::setprecision(17) << "scenario,agent,t";
    for (int r = 0; r < cfg.dims.n; ++r) os << ",x_" << r;
    for (int r = 0; r < cfg.dims.k; ++r) os << ",u_" << r;
    os << '\n';
    for (int a : agents)
      for (int j = 0; j < g.nodes(); ++j) {
        os << 0 << ',' << a << ',' << t[j];
        for (int r = 0; r < cfg.dims.n; ++r) os << ',' << first.aux_states[j](r, a);
        for (int r = 0; r < cfg.dims.k; ++r) os << ',' << first.controls[j](r, a);
        os << '\n';
      }
  }
  run.record("trajectories.csv");

  auto agent_table = [&](const std::vector<Mat>& paths, const std::string& prefix) {
    std::vector<std::string> header{"t"};
    for (int a : agents) header.push_back(prefix + std::to_string(a));
    std::vector<std::vector<double>> rows;
    std::vector<PlotSeries> series;
    for (int a : agents) series.push_back({prefix + std::to_string(a), t, {}});
    for (int j = 0; j < g.nodes(); ++j) {
      std::vector<double> row{t[j]};
      for (std::size_t i = 0; i < agents.size(); ++i) {
        row.push_back(paths[j](0, agents[i]));
        series[i].y.push_back(paths[j](0, agents[i]));
      }
      rows.push_back(std::move(row));
    }
    return std::make_pair(std::make_pair(header, rows), series);
  };
  {
    auto [tab, series] = agent_table(first.controls, "u_");
    write_table_csv(run.file("fig2_controls.csv"), tab.first, tab.second);
    write_svg_plot(run.file("fig2_controls.svg"), "Decentralized controls", "t", series);
  }
  {
    auto [tab, series] = agent_table(first.aux_states, "x_");
    write_table_csv(run.file("fig3_states.csv"), tab.first, tab.second);
    write_svg_plot(run.file("fig3_states.svg"), "Auxiliary states", "t", series);
  }
  {
    std::vector<std::vector<double>> rows;
    PlotSeries a{"realized average", t, {}}, b{"mean field", t, {}};
    for (int j = 0; j < g.nodes(); ++j) {
      rows.push_back({t[j], first.average[j](0), first.mean_field[j](0)});
      a.y.push_back(first.average[j](0));
      b.y.push_back(first.mean_field[j](0));
    }
    write_table_csv(run.file("fig4_mean_field.csv"), {"t", "xhat_N", "xbar_star"}, rows);
    write_svg_plot(run.file("fig4_mean_field.svg"), "Realized average vs mean field", "t", {a, b});
  }
  for (const char* f : {"fig2_controls.csv", "fig2_controls.svg", "fig3_states.csv", "fig3_states.svg",
                        "fig4_mean_field.csv", "fig4_mean_field.svg"})
    run.record(f);

  json rep;
  rep["N"] = N;
  rep["scenarios"] = scenarios;
  rep["agent0_cost"] = mean_se_json(mean_se(cost));
  rep["sup_gap_mean_field"] = sup_gap;
  write_json(run.file("simulate.json"), rep);
  run.record("simulate.json");
  std::cout << "simulate: N = " << N << ", scenarios = " << scenarios << ", sup|xhat_N - xbar*| (scenario 0) = "
            << sup_gap[0] << '\n';
}

bool cmd_verify(const GameConfig& cfg, Run& run) {
  json rep;
  bool all = true;
  auto verdict = [&](const std::string& name, bool pass, json detail) {
    detail["pass"] = pass;
    rep[name] = std::move(detail);
    all = all && pass;
    std::cout << (pass ? "PASS " : "FAIL ") << name << '\n';
  };

  const auto pipe = build_decentralized(cfg);
  {
    double sup = 0.0;
    for (const auto& m : pipe.sols.S) sup = std::max(sup, m.norm());
    verdict("s_annihilation", sup < 1e-12, {{"sup_norm_S", sup}});
  }
  {
    const auto cc = solve_cc_system(cfg, {run.fault_k});
    const auto id = compare_methods(pipe.sols, pipe.off, cc);
    verdict("method_identity", id.pass,
            {{"P", id.P}, {"K", id.K}, {"phi", id.phi}, {"self_gain", id.self_gain}, {"mf_gain", id.mf_gain},
             {"offset", id.offset}, {"positivity_agree", id.positivity_agree}, {"tolerance", id.tolerance}});
    const auto slln = conditional_mean_check(cfg, cc, run.n_list, run.scenarios, run.seed);
    json rows = json::array();
    for (const auto& r : slln.rows) rows.push_back({{"N", r.N}, {"gap", mean_se_json(r.gap)}});
    verdict("conditional_mean", slln.slope.exact || slope_in(slln.slope, -1.4, -0.6),
            {{"rows", rows}, {"slope", slope_json(slln.slope)}});
  }
  {
    const auto gap = asymptotic_gap_study(cfg, run.gap_list);
    json rows = json::array();
    for (const auto& r : gap.rows)
      rows.push_back({{"N", r.N}, {"solved", r.solved}, {"note", r.note}, {"P", r.P}, {"K", r.K}, {"Pi", r.Pi},
                      {"S", r.S}, {"M", r.M}, {"phi", r.phi}, {"psi", r.psi}});
    auto ok = [](const SlopeFit& s) { return s.exact || slope_in(s, -1.3, -0.7); };
    verdict("asymptotic_solvability", ok(gap.P) && ok(gap.K) && ok(gap.Pi) && ok(gap.S) && ok(gap.M),
            {{"rows", rows},
             {"slopes",
              {{"P", slope_json(gap.P)}, {"K", slope_json(gap.K)}, {"Pi", slope_json(gap.Pi)},
               {"S", slope_json(gap.S)}, {"M", slope_json(gap.M)}, {"phi", slope_json(gap.phi)},
               {"psi", slope_json(gap.psi)}}}});
  }
  {
    const auto conv = convergence_study(cfg, pipe, run.n_list, run.scenarios, run.seed);
    json rows = json::array();
    for (const auto& r : conv.rows)
      rows.push_back({{"N", r.N}, {"cc1", mean_se_json(r.cc1)}, {"cc2", mean_se_json(r.cc2)},
                      {"cc3", mean_se_json(r.cc3)}});
    auto ok = [](const SlopeFit& s) { return s.exact || slope_in(s, -1.4, -0.6); };
    verdict("convergence", ok(conv.cc1) && ok(conv.cc2) && ok(conv.cc3),
            {{"rows", rows},
             {"slopes", {{"cc1", slope_json(conv.cc1)}, {"cc2", slope_json(conv.cc2)}, {"cc3", slope_json(conv.cc3)}}},
             {"band_97_5_at_N", cfg.dims.N},
             {"band", conv.band(cfg.dims.N)}});
  }
  {
    const std::vector<DeviationFamily> fams{DeviationFamily::kConstant, DeviationFamily::kRamp,
                                            DeviationFamily::kFeedback};
    const std::vector<double> amps{-0.5, -0.25, -0.1, 0.1, 0.25, 0.5};
    json rows = json::array();
    std::vector<double> x, eps;
    bool bounded = true;
    for (int N : run.deviation_list) {
      const auto d = deviation_test(cfg, pipe, N, fams, amps, run.scenarios, run.seed);
      json pts = json::array();
      for (const auto& p : d.points)
        pts.push_back({{"family", to_string(p.family)}, {"amplitude", p.amplitude},
                       {"delta_raw", mean_se_json(p.delta_raw)}, {"delta", mean_se_json(p.delta)},
                       {"gap", mean_se_json(p.gap)}, {"quadratic", mean_se_json(p.quadratic)}});
      rows.push_back({{"N", N}, {"min_delta", d.min_delta}, {"eps", d.eps}, {"eps_se", d.eps_se},
                      {"eps_literal", d.eps_literal}, {"points", pts}});
      bounded = bounded && d.min_delta >= -d.eps;
      x.push_back(N);
      eps.push_back(d.eps);
    }
    const auto fit = fit_loglog_slope(x, eps, 1e-14);
    verdict("epsilon_nash", bounded && (fit.exact || slope_in(fit, -1.4, -0.6)),
            {{"rows", rows}, {"eps_slope", slope_json(fit)}});
  }
  {
    const auto cx = convexity_probe(cfg, 100, run.seed);
    verdict("convexity", cx.pass, {{"min_value", cx.min_value}, {"trials", cx.samples.size()}});
  }
  rep["pass"] = all;
  write_json(run.file("verify.json"), rep);
  run.record("verify.json");
  return all;
}

std::vector<int> parse_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const int v = std::stoi(item);
    if (v < 2) throw ConfigError("agent counts must be >= 2");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty N list");
  return out;
}

void write_manifest(const Run& run) {
  json m;
  m["subcommand"] = run.subcommand;
  m["config"] = run.config_path;
  m["out"] = run.out.string();
  m["seed"] = run.seed;
  m["N"] = run.N;
  m["n_list"] = run.n_list;
  m["gap_list"] = run.gap_list;
  m["deviation_list"] = run.deviation_list;
  m["scenarios"] = run.scenarios;
  m["sim_scenarios"] = run.sim_scenarios;
  m["steps"] = run.steps;
  m["threads"] = thread_count();
  if (run.fault_k != 0.0) m["fault_k_terminal"] = run.fault_k;
  m["artifacts"] = run.artifacts;
  write_json((run.out / "manifest.json").string(), m);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear-quadratic mean-field games with common noise"};
  app.require_subcommand(1);
  Run run;
  std::string n_list, gap_list, dev_list;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", run.config_path, "game configuration (JSON)");
    if (needs_config) c->required();
    sub->add_option("--out", run.out, "output directory")->required();
    sub->add_option("--seed", run.seed, "master seed");
    sub->add_option("--steps", run.steps, "override the number of time steps");
  };
  auto* riccati = app.add_subcommand("riccati", "solve the limit and finite-N systems");
  common(riccati, true);
  riccati->add_option("--n", run.N, "agent count for the finite-N system")->check(CLI::Range(2, 1 << 20));
  auto* simulate = app.add_subcommand("simulate", "simulate the decentralized strategy");
  common(simulate, true);
  simulate->add_option("--n", run.N, "agent count")->check(CLI::Range(2, 1 << 20));
  simulate->add_option("--scenarios", run.sim_scenarios, "Monte Carlo scenarios")->check(CLI::PositiveNumber);
  auto* verify = app.add_subcommand("verify", "run the verification studies");
  common(verify, true);
  verify->add_option("--n-list", n_list, "comma-separated agent counts for the Monte Carlo studies");
  verify->add_option("--gap-list", gap_list, "comma-separated agent counts for the Riccati gap study");
  verify->add_option("--deviation-list", dev_list, "comma-separated agent counts for the deviation test");
  verify->add_option("--scenarios", run.scenarios, "Monte Carlo scenarios")->check(CLI::PositiveNumber);
  verify->add_option("--fault-k-terminal", run.fault_k, "perturb the fixed-point K(T) (fault injection)");
  auto* example = app.add_subcommand("example-production", "production-planning preset end to end");
  common(example, false);
  example->add_option("--n", run.N, "agent count")->check(CLI::Range(2, 1 << 20));
  example->add_option("--n-list", n_list, "comma-separated agent counts for the Monte Carlo studies");
  example->add_option("--deviation-list", dev_list, "comma-separated agent counts for the deviation test");
  example->add_option("--scenarios", run.scenarios, "Monte Carlo scenarios for verification")
      ->check(CLI::PositiveNumber);
  example->add_option("--sim-scenarios", run.sim_scenarios, "Monte Carlo scenarios for the figures")
      ->check(CLI::PositiveNumber);
  example->add_option("--fault-k-terminal", run.fault_k, "perturb the fixed-point K(T) (fault injection)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!n_list.empty()) run.n_list = parse_list(n_list);
    if (!gap_list.empty()) run.gap_list = parse_list(gap_list);
    if (!dev_list.empty()) run.deviation_list = parse_list(dev_list);
    fs::create_directories(run.out);

    GameConfig cfg;
    auto* sub = app.get_subcommands().front();
    run.subcommand = sub->get_name();
    const bool seeded = sub->count("--seed") > 0;
    if (run.subcommand == "example-production") {
      if (!seeded) run.seed = kPresetSeed;
      cfg = production_planning_config({}, run.N, run.steps > 0 ? run.steps : 1000, run.seed);
      run.config_path = "preset:production";
    } else {
      if (run.steps > 0) {
        std::ifstream is(run.config_path);
        if (!is) throw ConfigError("cannot open " + run.config_path);
        json j;
        try {
          j = json::parse(is);
        } catch (const json::exception& e) {
          throw ConfigError(e.what());
        }
        j["grid"]["M"] = run.steps;
        cfg = config_from_json(j);
      } else {
        cfg = load_config(run.config_path);
      }
      if (const auto* nopt = sub->get_option_no_throw("--n"); nopt && nopt->count() > 0)
        cfg.dims.N = run.N;
      else
        run.N = cfg.dims.N;
      if (seeded)
        cfg.seed = run.seed;
      else
        run.seed = cfg.seed;
    }
    const auto report = validate_config(cfg);
    if (!report.pass()) {
      for (const auto& c : report.clauses)
        if (!c.pass) std::cerr << "config: " << c.name << " fails: " << c.detail << '\n';
      return kExitUsage;
    }
    save_config(cfg, run.file("config.json"));
    run.record("config.json");

    bool ok = true;
    if (run.subcommand == "riccati") {
      cmd_riccati(cfg, run);
    } else if (run.subcommand == "simulate") {
      cmd_simulate(cfg, run);
    } else if (run.subcommand == "verify") {
      ok = cmd_verify(cfg, run);
    } else {
      cmd_riccati(cfg, run);
      cmd_simulate(cfg, run);
      ok = cmd_verify(cfg, run);
    }
    write_manifest(run);
    return ok ? kExitOk : kExitVerification;
  } catch (const SolvabilityError& e) {
    std::cerr << "solvability: " << e.what() << " [" << e.clause() << " at t = " << e.time() << "]\n";
    if (!run.out.empty()) write_manifest(run);
    return kExitSolvability;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << " at t = " << e.time() << '\n';
    return kExitSolvability;
  } catch (const ConfigError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kExitUsage;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
