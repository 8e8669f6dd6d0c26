#include "mfglq/nash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mfglq/parallel.hpp"
#include "systems.hpp"

namespace mfglq {

namespace {

double quad(const Mat& W, const Vec& v) { return v.dot(W * v); }

}  // namespace

CostBreakdown path_cost(const GameConfig& cfg, const std::vector<Mat>& states, const std::vector<Mat>& controls,
                        const std::vector<Vec>& average, int agent) {
  const int M = cfg.grid.steps();
  if (static_cast<int>(states.size()) != M + 1 || static_cast<int>(controls.size()) < M ||
      static_cast<int>(average.size()) != M + 1)
    throw ConfigError("cost: paths do not cover the grid");
  if (agent < 0 || agent >= states[0].cols()) throw ConfigError("cost: agent index out of range");
  const double dt = cfg.grid.dt();
  CostBreakdown c;
  for (int j = 0; j < M; ++j) {
    const auto s = sample(cfg, j);
    const Vec e = states[j].col(agent) - s.Gamma1 * average[j] - s.eta1;
    const Vec u = controls[j].col(agent) - s.eta2;
    c.state += quad(s.Q, e) * dt;
    c.control += quad(s.R, u) * dt;
  }
  const auto& k = cfg.cost;
  const Vec e = states[M].col(agent) - k.Gamma0 * average[M] - k.eta0;
  c.terminal = quad(k.G, e);
  c.state *= 0.5;
  c.control *= 0.5;
  c.terminal *= 0.5;
  return c;
}

CostReport evaluate_cost(const GameConfig& cfg, const std::vector<TrajectoryBundle>& bundles, int agent) {
  CostReport r;
  r.agent = agent;
  r.scenarios = static_cast<int>(bundles.size());
  std::vector<double> tot, st, ct, tm;
  for (const auto& b : bundles) {
    const auto c = path_cost(cfg, b.states, b.controls, b.average, agent);
    tot.push_back(c.total());
    st.push_back(c.state);
    ct.push_back(c.control);
    tm.push_back(c.terminal);
  }
  r.total = mean_se(tot);
  r.state = mean_se(st);
  r.control = mean_se(ct);
  r.terminal = mean_se(tm);
  return r;
}

ConvexityReport convexity_probe(const GameConfig& cfg, int trials, std::uint64_t seed, int noise_scenarios,
                                int pieces) {
  cfg.check_structure();
  const int N = cfg.dims.N;
  const int M = cfg.grid.steps();
  const auto n = cfg.dims.n, k = cfg.dims.k;
  const double dt = cfg.grid.dt();
  const double T = cfg.grid.horizon();
  pieces = std::max(1, std::min(pieces, M));

  std::vector<NoiseBundle> noise;
  for (int s = 0; s < noise_scenarios; ++s) noise.push_back(make_noise(cfg.grid, N, seed, 1000003ULL + s));

  const Vec zn = Vec::Zero(n);
  const Vec zk = Vec::Zero(k);
  ConvexityReport rep;
  rep.samples.assign(trials, 0.0);
  parallel_for(trials, [&](int t) {
    std::mt19937_64 eng(stream_seed(seed, static_cast<std::uint64_t>(t), 7, 0));
    std::normal_distribution<double> nd(0.0, 1.0);
    Mat levels(k, pieces);
    for (Eigen::Index c = 0; c < levels.cols(); ++c)
      for (Eigen::Index r = 0; r < k; ++r) levels(r, c) = nd(eng);
    std::vector<Vec> u(M);
    double norm2 = 0.0;
    for (int j = 0; j < M; ++j) {
      const int p = std::min(pieces - 1, static_cast<int>(cfg.grid.time(j) / T * pieces));
      u[j] = levels.col(p);
      norm2 += u[j].squaredNorm() * dt;
    }
    const double scale = norm2 > 0 ? 1.0 / std::sqrt(norm2) : 0.0;
    for (auto& v : u) v *= scale;

    double total = 0.0;
    for (const auto& nb : noise) {
      Mat Y = Mat::Zero(n, N);
      Mat U = Mat::Zero(k, N);
      double val = 0.0;
      for (int j = 0; j < M; ++j) {
        const auto full = sample(cfg, j);
        const CoefficientSample s{full.A, full.B, full.E, full.C, full.D, full.F, full.C0, full.D0, full.F0,
                                  zn,     zn,     zn,     full.Q, full.R, full.Gamma1, zn, zk};
        const Vec ybar = Y.rowwise().mean();
        U.col(0) = u[j];
        const Vec e = Y.col(0) - s.Gamma1 * ybar;
        val += (quad(s.Q, e) + quad(s.R, u[j])) * dt;
        Y = euler_step(s, Y, U, ybar, dt, nb.dW.col(j), nb.dW0(j));
      }
      const Vec ybar = Y.rowwise().mean();
      val += quad(cfg.cost.G, Vec(Y.col(0) - cfg.cost.Gamma0 * ybar));
      total += val;
    }
    rep.samples[t] = total / std::max(1, noise_scenarios);
  });
  rep.min_value = rep.samples.empty() ? 0.0 : *std::min_element(rep.samples.begin(), rep.samples.end());
  rep.pass = !rep.samples.empty() && rep.min_value >= -1e-8;
  return rep;
}

double ConvergenceReport::band(int N, double q) const {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : rows)
    if (!r.sup_gap.empty()) pts.emplace_back(r.N, quantile(r.sup_gap, q));
  if (pts.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(pts.begin(), pts.end());
  if (N <= pts.front().first) return pts.front().second;
  if (N >= pts.back().first) return pts.back().second;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (N <= pts[i].first) {
      const auto [x0, y0] = pts[i - 1];
      const auto [x1, y1] = pts[i];
      const double w = (std::log(N) - std::log(x0)) / (std::log(x1) - std::log(x0));
      return std::exp((1.0 - w) * std::log(y0) + w * std::log(y1));
    }
  }
  return pts.back().second;
}

ConvergenceReport convergence_study(const GameConfig& cfg, const std::vector<int>& N_list, int scenarios,
                                    std::uint64_t seed) {
  return convergence_study(cfg, build_decentralized(cfg), N_list, scenarios, seed);
}

ConvergenceReport convergence_study(const GameConfig& cfg, const DecentralizedPipeline& pipe,
                                    const std::vector<int>& N_list, int scenarios, std::uint64_t seed) {
  ConvergenceReport rep;
  for (int N : N_list) {
    std::vector<double> c1(scenarios), c2(scenarios), c3(scenarios), sup(scenarios);
    parallel_for(scenarios, [&](int s) {
      const auto noise = make_noise(cfg.grid, N, seed, static_cast<std::uint64_t>(s));
      const auto init = sample_initials(cfg.initial, N, seed, static_cast<std::uint64_t>(s));
      const auto b = simulate_decentralized(cfg, pipe.gains, noise, init);
      double g1 = 0, g2 = 0;
      Vec g3 = Vec::Zero(N);
      for (std::size_t j = 0; j < b.states.size(); ++j) {
        g1 = std::max(g1, (b.aux_average[j] - b.mean_field[j]).squaredNorm());
        g2 = std::max(g2, (b.average[j] - b.mean_field[j]).squaredNorm());
        g3 = g3.cwiseMax((b.states[j] - b.aux_states[j]).colwise().squaredNorm().transpose());
      }
      c1[s] = g1;
      c2[s] = g2;
      c3[s] = g3.mean();
      sup[s] = std::sqrt(g2);
    });
    ConvergenceRow row;
    row.N = N;
    row.cc1 = mean_se(c1);
    row.cc2 = mean_se(c2);
    row.cc3 = mean_se(c3);
    row.sup_gap = std::move(sup);
    rep.rows.push_back(std::move(row));
  }
  std::vector<double> x, y1, y2, y3;
  for (const auto& r : rep.rows) {
    x.push_back(r.N);
    y1.push_back(r.cc1.mean);
    y2.push_back(r.cc2.mean);
    y3.push_back(r.cc3.mean);
  }
  rep.cc1 = fit_loglog_slope(x, y1, 1e-12);
  rep.cc2 = fit_loglog_slope(x, y2, 1e-12);
  rep.cc3 = fit_loglog_slope(x, y3, 1e-12);
  return rep;
}

std::string to_string(DeviationFamily f) {
  switch (f) {
    case DeviationFamily::kConstant:
      return "constant";
    case DeviationFamily::kRamp:
      return "ramp";
    case DeviationFamily::kFeedback:
      return "feedback";
  }
  return "unknown";
}

namespace {

struct PointSample {
  double raw = 0, Z = 0, V = 0, L = 0, quad = 0;
  double L_aux = 0;  // linear gap with the auxiliary agent 1 and x̄* in place of x̂_1, x̂^(N)
  double I = 0;      // ∫ (running part of L_aux + Itô drift of Y) dt
};

// Per-node quantities of the equilibrium that the control variate needs.
// The control variate is the discrete martingale part of
// Y = <λ_1, x̃_1> + <λ_c, x̃^(N)>, where λ_1, λ_c are the limit costates of the
// auxiliary agent 1. Y(0) = 0 and Y(T) is the terminal part of the linear gap.
struct CvNode {
  Vec lam1, lamc;      // P x̄_1 + K x̄* + φ,  Π x̄_1 + M x̄* + ψ
  Vec ml1, mlc;        // E_j of lam1, lamc at node j+1
  Vec a1, b1, ac, bc;  // their dW_1 and dW_0 loadings over the step
  Vec dl1, dlc;        // drifts of lam1, lamc at node j
  Vec q1, q10, qc, qc0;  // diffusion coefficients of lam1, lamc at node j
  Vec ebar;            // x̄_1 - Γ1 x̄* - η1
};

Vec deviation_direction(DeviationFamily fam, const TimeGrid& grid, int j, const Mat& feedback_map, const Vec& own) {
  switch (fam) {
    case DeviationFamily::kConstant:
      return Vec::Ones(feedback_map.rows());
    case DeviationFamily::kRamp:
      return Vec::Constant(feedback_map.rows(), grid.time(j) / grid.horizon());
    case DeviationFamily::kFeedback:
      return feedback_map * own;
  }
  return Vec();
}

// Conditional means given agent 1's own data (ξ_1, W_1) and W₀. The system is
// affine in the other agents' initial spread and idiosyncratic increments, so
// these are the runs with those switched off: agent 1 in column 0 and one
// class of N-1 identical agents in column 1.
class AgentOneConditional {
 public:
  AgentOneConditional(const GameConfig& cfg, const GainSchedule& gains, int N, const TrajectoryBundle& b)
      : cfg_(cfg), gains_(gains), N_(N), b_(b) {
    const int M = cfg.grid.steps();
    const auto& z = b.mean_field;
    Mat X(cfg.dims.n, 2);
    X.col(0) = b.states[0].col(0);
    X.col(1) = z[0];
    realized_.resize(M + 1);
    for (int j = 0; j <= M; ++j) {
      realized_[j] = X;
      if (j == M) break;
      X = euler_step(sample(cfg, j), X, controls(j), average(X), cfg.grid.dt(), increments(j), b.noise.dW0(j));
    }
  }

  // E[(x̂_1 - x̄_1) - Γ(x̂^(N) - x̄*) | agent 1, W₀]
  Vec spread(int j, const Mat& Gam) const {
    const Mat& X = realized_[j];
    return (X.col(0) - b_.aux_states[j].col(0)) - Gam * (average(X) - b_.mean_field[j]);
  }

  // E[x̃_1 - Γ x̃^(N) | agent 1, W₀] for one deviation.
  std::vector<Vec> deviation(DeviationFamily fam, double delta) const {
    const int M = cfg_.grid.steps();
    const Mat feedback_map = Mat::Identity(cfg_.dims.k, cfg_.dims.n);
    Mat X = realized_[0];
    std::vector<Vec> e(M + 1);
    for (int j = 0; j <= M; ++j) {
      const Mat& Gam = j < M ? cfg_.cost.Gamma1[j] : cfg_.cost.Gamma0;
      const Mat xt = X - realized_[j];
      e[j] = xt.col(0) - Gam * average(xt);
      if (j == M) break;
      Mat U = controls(j);
      U.col(0) += delta * deviation_direction(fam, cfg_.grid, j, feedback_map, X.col(0));
      X = euler_step(sample(cfg_, j), X, U, average(X), cfg_.grid.dt(), increments(j), b_.noise.dW0(j));
    }
    return e;
  }

 private:
  Vec average(const Mat& X) const { return (X.col(0) + (N_ - 1.0) * X.col(1)) / N_; }
  Vec increments(int j) const { return Eigen::Vector2d(b_.noise.dW(0, j), 0.0); }
  Mat controls(int j) const {
    const Vec& z = b_.mean_field[j];
    Mat U(cfg_.dims.k, 2);
    U.col(0) = b_.controls[j].col(0);
    U.col(1) = (gains_.self_gain[j] + gains_.mf_gain[j]) * z + gains_.offset[j];
    return U;
  }

  const GameConfig& cfg_;
  const GainSchedule& gains_;
  int N_;
  const TrajectoryBundle& b_;
  std::vector<Mat> realized_;
};

std::vector<PointSample> deviate_scenario(const GameConfig& cfg, const DecentralizedPipeline& pipe, int N,
                                          const std::vector<DeviationFamily>& families,
                                          const std::vector<double>& amplitudes, std::uint64_t seed,
                                          std::uint64_t scenario) {
  const int M = cfg.grid.steps();
  const double dt = cfg.grid.dt();
  const auto n = cfg.dims.n, k = cfg.dims.k;
  const auto& L = pipe.sols;
  const auto& off = pipe.off;
  const auto noise = make_noise(cfg.grid, N, seed, scenario);
  const auto init = sample_initials(cfg.initial, N, seed, scenario);
  const auto b = simulate_decentralized(cfg, pipe.gains, noise, init);
  const double J_eq = path_cost(cfg, b.states, b.controls, b.average, 0).total();

  std::vector<CvNode> cv(M + 1);
  for (int j = 0; j <= M; ++j) {
    const Vec x1 = b.aux_states[j].col(0);
    const Vec& z = b.mean_field[j];
    cv[j].lam1 = L.P[j] * x1 + L.K[j] * z + off.phi[j];
    cv[j].lamc = L.Pi[j] * x1 + L.M[j] * z + off.psi[j];
    if (j == M) break;
    const auto s = sample(cfg, j);
    const Vec u1 = b.controls[j].col(0);
    const Vec uz = (pipe.gains.self_gain[j] + pipe.gains.mf_gain[j]) * z + pipe.gains.offset[j];
    const Vec mx = x1 + (s.A * x1 + s.B * u1 + s.E * z + s.f) * dt;
    const Vec mz = z + ((s.A + s.E) * z + s.B * uz + s.f) * dt;
    const Vec sig1 = s.C * x1 + s.D * u1 + s.F * z + s.g;
    const Vec sig10 = s.C0 * x1 + s.D0 * u1 + s.F0 * z + s.g0;
    const Vec sigz0 = (s.C0 + s.F0) * z + s.D0 * uz + s.g0;
    Stack y{L.P[j], L.K[j], L.Pi[j], L.S[j], L.M[j], off.phi[j], off.psi[j]};
    const Stack dy = detail::limit_rhs(cfg, j, y, cfg.grid.time(j), detail::kFull, SolveOptions{}, L.scale);
    const Vec dx = s.A * x1 + s.B * u1 + s.E * z + s.f;
    const Vec dz = (s.A + s.E) * z + s.B * uz + s.f;
    cv[j].dl1 = dy[detail::kP] * x1 + L.P[j] * dx + dy[detail::kK] * z + L.K[j] * dz + Vec(dy[detail::kPhi]);
    cv[j].dlc = dy[detail::kPi] * x1 + L.Pi[j] * dx + dy[detail::kM] * z + L.M[j] * dz + Vec(dy[detail::kPsi]);
    cv[j].q1 = L.P[j] * sig1;
    cv[j].q10 = L.P[j] * sig10 + L.K[j] * sigz0;
    cv[j].qc = L.Pi[j] * sig1;
    cv[j].qc0 = L.Pi[j] * sig10 + L.M[j] * sigz0;
    cv[j].ebar = x1 - s.Gamma1 * z - s.eta1;
    const int i = j + 1;
    cv[j].ml1 = L.P[i] * mx + L.K[i] * mz + off.phi[i];
    cv[j].mlc = L.Pi[i] * mx + L.M[i] * mz + off.psi[i];
    cv[j].a1 = L.P[i] * sig1;
    cv[j].b1 = L.P[i] * sig10 + L.K[i] * sigz0;
    cv[j].ac = L.Pi[i] * sig1;
    cv[j].bc = L.Pi[i] * sig10 + L.M[i] * sigz0;
  }

  // Realized minus auxiliary tracking error, centred given agent 1 and W₀.
  const AgentOneConditional given_one(cfg, pipe.gains, N, b);
  auto spread = [&](int j, const Mat& Gam) -> Vec {
    return (b.states[j].col(0) - b.aux_states[j].col(0)) - Gam * (b.average[j] - b.mean_field[j]) -
           given_one.spread(j, Gam);
  };
  const Mat feedback_map = Mat::Identity(k, n);
  std::vector<PointSample> out;
  for (auto fam : families) {
    for (double delta : amplitudes) {
      PointSample ps;
      const auto e0 = given_one.deviation(fam, delta);
      Mat X = init.xi;
      CostBreakdown J;
      for (int j = 0; j <= M; ++j) {
        const auto s = sample(cfg, j);
        const Vec xbar = X.rowwise().mean();
        const Mat xt = X - b.states[j];
        const Vec xtN = xbar - b.average[j];
        const Vec et = xt.col(0) - (j < M ? s.Gamma1 : cfg.cost.Gamma0) * xtN;
        if (j == M) {
          const auto& c = cfg.cost;
          const Vec e = X.col(0) - c.Gamma0 * xbar - c.eta0;
          const Vec eh = b.states[M].col(0) - c.Gamma0 * b.average[M] - c.eta0;
          J.terminal = 0.5 * quad(c.G, e);
          ps.quad += 0.5 * quad(c.G, et);
          ps.L += et.dot(c.G * eh);
          ps.V += e0[M].dot(c.G * spread(M, c.Gamma0));
          ps.L_aux += et.dot(c.G * Vec(b.aux_states[M].col(0) - c.Gamma0 * b.mean_field[M] - c.eta0));
          break;
        }
        const Vec ubar1 = b.controls[j].col(0);
        const Vec v = deviation_direction(fam, cfg.grid, j, feedback_map, X.col(0));
        Mat U = b.controls[j];
        U.col(0) = ubar1 + delta * v;
        const Vec ut = U.col(0) - ubar1;

        const Vec e = X.col(0) - s.Gamma1 * xbar - s.eta1;
        const Vec cu = U.col(0) - s.eta2;
        J.state += quad(s.Q, e) * dt;
        J.control += quad(s.R, cu) * dt;
        const Vec eh = b.states[j].col(0) - s.Gamma1 * b.average[j] - s.eta1;
        ps.quad += 0.5 * (quad(s.Q, et) + quad(s.R, ut)) * dt;
        ps.L += (et.dot(s.Q * eh) + ut.dot(s.R * (ubar1 - s.eta2))) * dt;
        ps.V += e0[j].dot(s.Q * spread(j, s.Gamma1)) * dt;

        const auto& c = cv[j];
        const Vec x1t = xt.col(0);
        const Vec Xi1 = s.C * x1t + s.D * ut + s.F * xtN;
        const Vec X01 = s.C0 * x1t + s.D0 * ut + s.F0 * xtN;
        const Vec X0N = (s.C0 + s.F0) * xtN + s.D0 * ut / N;
        const Vec mx1 = x1t + (s.A * x1t + s.B * ut + s.E * xtN) * dt;
        const Vec mxN = xtN + ((s.A + s.E) * xtN + s.B * ut / N) * dt;
        const double running = et.dot(s.Q * c.ebar) + ut.dot(s.R * (ubar1 - s.eta2));
        ps.L_aux += running * dt;
        const double drift = c.dl1.dot(x1t) + c.lam1.dot(s.A * x1t + s.B * ut + s.E * xtN) + c.q1.dot(Xi1) +
                             c.q10.dot(X01) + c.dlc.dot(xtN) + c.lamc.dot((s.A + s.E) * xtN + s.B * ut / N) +
                             c.qc.dot(Xi1) / N + c.qc0.dot(X0N);
        ps.I += (running + drift) * dt;
        const double cond = c.ml1.dot(mx1) + c.mlc.dot(mxN) +
                            dt * (c.a1.dot(Xi1) + c.b1.dot(X01) + c.ac.dot(Xi1) / N + c.bc.dot(X0N));

        X = euler_step(s, X, U, xbar, dt, noise.dW.col(j), noise.dW0(j));
        const Vec next1 = X.col(0) - b.states[j + 1].col(0);
        const Vec nextN = X.rowwise().mean() - b.average[j + 1];
        ps.Z += cv[j + 1].lam1.dot(next1) + cv[j + 1].lamc.dot(nextN) - cond;
      }
      J.state *= 0.5;
      J.control *= 0.5;
      ps.raw = J.total() - J_eq;
      out.push_back(ps);
    }
  }
  return out;
}

}  // namespace

DeviationReport deviation_test(const GameConfig& cfg, const DecentralizedPipeline& pipe, int N,
                               const std::vector<DeviationFamily>& families, const std::vector<double>& amplitudes,
                               int scenarios, std::uint64_t seed) {
  if (N < 2) throw PreconditionError("deviation test requires N >= 2");
  std::vector<std::vector<PointSample>> per(scenarios);
  parallel_for(scenarios, [&](int s) {
    per[s] = deviate_scenario(cfg, pipe, N, families, amplitudes, seed, static_cast<std::uint64_t>(s));
  });
  DeviationReport rep;
  rep.N = N;
  rep.scenarios = scenarios;
  std::size_t idx = 0;
  double min_gap = std::numeric_limits<double>::infinity();
  rep.min_delta = std::numeric_limits<double>::infinity();
  for (auto fam : families) {
    for (double a : amplitudes) {
      std::vector<double> raw, d, g, q;
      for (const auto& sc : per) {
        const auto& p = sc[idx];
        raw.push_back(p.raw);
        d.push_back(p.raw - p.Z - p.V);
        g.push_back(p.L - p.L_aux - p.V + p.I);
        q.push_back(p.quad);
      }
      DeviationPoint pt{fam, a, mean_se(raw), mean_se(d), mean_se(g), mean_se(q)};
      rep.min_delta = std::min(rep.min_delta, pt.delta.mean);
      if (pt.gap.mean < min_gap) {
        min_gap = pt.gap.mean;
        rep.eps_se = pt.gap.se;
      }
      rep.points.push_back(pt);
      ++idx;
    }
  }
  if (rep.points.empty()) {
    rep.min_delta = 0.0;
    min_gap = 0.0;
  }
  rep.eps_literal = std::max(0.0, -rep.min_delta);
  rep.eps = std::max(0.0, -min_gap);
  return rep;
}

}  // namespace mfglq
