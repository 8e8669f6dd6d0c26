#include "mfglq/riccati.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "mfglq/nonhomogeneous.hpp"
#include "systems.hpp"

namespace mfglq {

using namespace detail;

MatrixSchedule LimitRiccatiSolutions::N() const {
  MatrixSchedule out(P.size());
  for (std::size_t j = 0; j < P.size(); ++j) out[j] = P[j] + K[j];
  return out;
}

namespace {

void check_prefix(const MatrixSchedule& given, const MatrixSchedule& solved, const char* name) {
  if (given.size() != solved.size()) throw ConfigError(std::string(name) + ": grid mismatch");
  for (std::size_t j = 0; j < given.size(); ++j)
    if (given[j].rows() != solved[j].rows() || !(given[j].array() == solved[j].array()).all())
      throw PreconditionError(std::string(name) + " does not match the solution on this configuration");
}

template <class Sols>
void fill_limit_derived(const GameConfig& cfg, Sols& s) {
  const int m = cfg.grid.nodes();
  s.calR.resize(m);
  s.Ptilde.resize(m);
  s.Ktilde.resize(m);
  s.calRhat.resize(m);
  for (int j = 0; j < m; ++j) {
    auto d = limit_derived(cfg, j, s.P[j], s.K[j]);
    s.calR[j] = std::move(d.calR);
    s.Ptilde[j] = std::move(d.Ptilde);
    s.Ktilde[j] = std::move(d.Ktilde);
    s.calRhat[j] = std::move(d.calRhat);
  }
}

double min_sym_eig(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

template <class Sols>
PositivityReport positivity(const Sols& s) {
  PositivityReport rep;
  rep.threshold = 1e-9 * s.scale;
  const auto m = s.calR.size();
  rep.min_eig_R.resize(m);
  rep.min_eig_Rhat.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    rep.min_eig_R[j] = min_sym_eig(s.calR[j]);
    rep.min_eig_Rhat[j] = min_sym_eig(s.calRhat[j]);
  }
  for (std::size_t jj = m; jj-- > 0;) {
    if (!(rep.min_eig_R[jj] > rep.threshold) || !(rep.min_eig_Rhat[jj] > rep.threshold)) {
      rep.first_violation = s.grid.time(static_cast<int>(jj));
      break;
    }
  }
  return rep;
}

}  // namespace

MatrixSchedule solve_limit_P(const GameConfig& cfg, const SolveOptions& opt) {
  return column<Mat>(solve_limit_stack(cfg, kOnlyP, opt), kP);
}

MatrixSchedule solve_limit_K(const GameConfig& cfg, const MatrixSchedule& P, const SolveOptions& opt) {
  auto path = solve_limit_stack(cfg, kWithK, opt);
  check_prefix(P, column<Mat>(path, kP), "P");
  return column<Mat>(path, kK);
}

PiSM solve_limit_Pi_S_M(const GameConfig& cfg, const MatrixSchedule& P, const MatrixSchedule& K,
                        const SolveOptions& opt) {
  auto path = solve_limit_stack(cfg, kRiccati, opt);
  check_prefix(P, column<Mat>(path, kP), "P");
  check_prefix(K, column<Mat>(path, kK), "K");
  return {column<Mat>(path, kPi), column<Mat>(path, kS), column<Mat>(path, kM)};
}

LimitRiccatiSolutions solve_limit(const GameConfig& cfg, const SolveOptions& opt) {
  auto path = solve_limit_stack(cfg, kRiccati, opt);
  LimitRiccatiSolutions s;
  s.grid = cfg.grid;
  s.P = column<Mat>(path, kP);
  s.K = column<Mat>(path, kK);
  s.Pi = column<Mat>(path, kPi);
  s.S = column<Mat>(path, kS);
  s.M = column<Mat>(path, kM);
  s.scale = positivity_scale(cfg);
  fill_limit_derived(cfg, s);
  return s;
}

FiniteNRiccatiSolutions solve_finite_N(const GameConfig& cfg, int N, const SolveOptions& opt) {
  auto path = solve_finite_stack(cfg, N, kRiccati, opt);
  FiniteNRiccatiSolutions s;
  s.grid = cfg.grid;
  s.N = N;
  s.P = column<Mat>(path, kP);
  s.K = column<Mat>(path, kK);
  s.Pi = column<Mat>(path, kPi);
  s.S = column<Mat>(path, kS);
  s.M = column<Mat>(path, kM);
  s.scale = positivity_scale(cfg);
  const int m = cfg.grid.nodes();
  s.calR.resize(m);
  s.Ptilde.resize(m);
  s.Ktilde.resize(m);
  s.calRhat.resize(m);
  for (int j = 0; j < m; ++j) {
    auto d = finite_derived(cfg, j, N, s.P[j], s.K[j]);
    s.calR[j] = std::move(d.calR);
    s.Ptilde[j] = std::move(d.Ptilde);
    s.Ktilde[j] = std::move(d.Ktilde);
    s.calRhat[j] = std::move(d.calRhat);
  }
  return s;
}

PositivityReport check_positivity(const LimitRiccatiSolutions& sols) { return positivity(sols); }
PositivityReport check_positivity(const FiniteNRiccatiSolutions& sols) { return positivity(sols); }

namespace {

bool is_multiple_of_identity(const Mat& m, double v) {
  return (m - v * Mat::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, std::abs(v));
}

}  // namespace

SolvabilityCheck solvability_hamiltonian(const GameConfig& cfg, double d1, double d2) {
  cfg.check_structure();
  const int m = cfg.grid.nodes();
  const auto n = cfg.dims.n;
  const auto& dy = cfg.dynamics;
  for (int j = 0; j < m; ++j) {
    if (dy.D0[j].cwiseAbs().maxCoeff() != 0.0)
      throw PreconditionError("Hamiltonian criterion requires D~ = 0");
    if (!is_multiple_of_identity(dy.F0[j], d1)) throw PreconditionError("Hamiltonian criterion requires F~ = delta1 I");
    if (!is_multiple_of_identity(dy.C0[j], d2)) throw PreconditionError("Hamiltonian criterion requires C~ = delta2 I");
  }
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw PreconditionError("Hamiltonian criterion requires delta1, delta2 > 0");

  const double scale = positivity_scale(cfg);
  const SolveOptions opt;
  const Mat In = Mat::Identity(n, n);

  auto hamiltonian = [&](int j, const Mat& P, double t) {
    const auto s = sample(cfg, j);
    const Mat calR = s.R + s.D.transpose() * P * s.D;
    const Mat Rinv = checked_inverse(calR, scale, t, "R + D'PD", true);
    const Mat CF = s.C + s.F;
    const Mat a = s.A + s.E - s.B * Rinv * s.D.transpose() * P * CF;
    const Mat b = s.A.transpose() + (d1 * d2 + d2 * d2) * In - s.C.transpose() * P * s.D * Rinv * s.B.transpose();
    const Mat Sq = s.B * Rinv * s.B.transpose();
    const Mat c = s.C.transpose() * P * CF + s.Q - s.Q * s.Gamma1 -
                  s.C.transpose() * P * s.D * Rinv * s.D.transpose() * P * CF;
    Mat H(2 * n, 2 * n);
    H << a, -Sq, -c, -b;
    return H;
  };

  Stack term{cfg.cost.G, Mat::Identity(2 * n, 2 * n)};
  auto rhs = [&](int j, const Stack& y, double t) {
    Stack dyv(2);
    dyv[0] = limit_rhs(cfg, j, Stack{y[0]}, t, kOnlyP, opt, scale)[0];
    dyv[1] = hamiltonian(j, y[0], t) * y[1];
    return dyv;
  };
  auto hook = [](Stack& y) { y[0] = sym(y[0]); };
  auto path = integrate_backward(cfg.grid, term, rhs, hook);

  SolvabilityCheck out;
  out.deltas = {d1, d2};
  out.H.resize(m);
  out.Psi.resize(m);
  out.min_singular.resize(m);
  out.K_from_hamiltonian.resize(m);
  Mat terminal(2 * n, n);
  terminal << In, cfg.cost.G - cfg.cost.G * cfg.cost.Gamma0;
  out.verdict = true;
  for (int j = m - 1; j >= 0; --j) {
    const Mat& P = path[j][0];
    out.Psi[j] = path[j][1];
    out.H[j] = hamiltonian(j, P, cfg.grid.time(j));
    const Mat UV = out.Psi[j] * terminal;
    const Mat U = UV.topRows(n), V = UV.bottomRows(n);
    Eigen::JacobiSVD<Mat> svd(U);
    out.min_singular[j] = svd.singularValues().minCoeff();
    if (!(out.min_singular[j] > 1e-9)) {
      out.verdict = false;
      if (!out.first_singular_time) out.first_singular_time = cfg.grid.time(j);
      out.K_from_hamiltonian[j] = Mat::Constant(n, n, std::nan(""));
    } else {
      out.K_from_hamiltonian[j] = V * U.partialPivLu().inverse() - P;
    }
  }
  return out;
}

StandardRiccatiCheck solvability_standard_riccati(const GameConfig& cfg, double d3, double d4, double d5) {
  cfg.check_structure();
  for (double d : {d3, d4, d5})
    if (!(d > 0.0 && d <= 1.0)) throw PreconditionError("standard-Riccati criterion requires deltas in (0, 1]");
  const int m = cfg.grid.nodes();
  const auto& dy = cfg.dynamics;
  for (int j = 0; j < m; ++j) {
    if (dy.F[j].cwiseAbs().maxCoeff() != 0.0 || dy.F0[j].cwiseAbs().maxCoeff() != 0.0)
      throw PreconditionError("standard-Riccati criterion requires F = F~ = 0");
    if (!is_multiple_of_identity(dy.E[j], d3)) throw PreconditionError("standard-Riccati criterion requires E = delta3 I");
    if (!is_multiple_of_identity(cfg.cost.Gamma1[j], d4))
      throw PreconditionError("standard-Riccati criterion requires Gamma1 = delta4 I");
  }
  if (!is_multiple_of_identity(cfg.cost.Gamma0, d5))
    throw PreconditionError("standard-Riccati criterion requires Gamma0 = delta5 I");

  const double scale = positivity_scale(cfg);
  const SolveOptions opt;
  Stack term{cfg.cost.G, cfg.cost.G - d5 * cfg.cost.G};
  auto rhs = [&](int j, const Stack& y, double t) {
    const auto s = sample(cfg, j);
    const Mat& P = y[0];
    const Mat& N = y[1];
    Stack out(2);
    out[0] = limit_rhs(cfg, j, Stack{P}, t, kOnlyP, opt, scale)[0];
    const Mat Rn = s.R + s.D.transpose() * P * s.D + s.D0.transpose() * N * s.D0;
    const Mat Rinv = checked_inverse(Rn, scale, t, "R + D'PD + D~'ND~", true);
    const Mat L = N * s.B + s.C0.transpose() * N * s.D0 + s.C.transpose() * P * s.D;
    const Mat Rt = s.B.transpose() * N + s.D.transpose() * P * s.C + s.D0.transpose() * N * s.C0;
    out[1] = -(N * s.A + s.A.transpose() * N + d3 * N + s.C.transpose() * P * s.C + s.C0.transpose() * N * s.C0 +
               s.Q - d4 * s.Q - L * Rinv * Rt);
    return out;
  };
  auto hook = [](Stack& y) { y[0] = sym(y[0]); };

  StandardRiccatiCheck out;
  out.deltas = {d3, d4, d5};
  try {
    auto path = integrate_backward(cfg.grid, term, rhs, hook);
    out.Nsum = column<Mat>(path, 1);
    out.K.resize(m);
    for (int j = 0; j < m; ++j) out.K[j] = path[j][1] - path[j][0];
    out.verdict = true;
  } catch (const SolvabilityError& e) {
    out.note = e.what();
  } catch (const DivergenceError& e) {
    out.note = e.what();
  }
  return out;
}

GapReport asymptotic_gap_study(const GameConfig& cfg, const std::vector<int>& N_list) {
  GapReport rep;
  const auto lim = solve_limit(cfg);
  const auto lim_off = solve_limit_phi_psi(cfg, lim);
  for (int N : N_list) {
    GapRow row;
    row.N = N;
    try {
      const auto fin = solve_finite_N(cfg, N);
      const auto fin_off = solve_finite_N_phi_psi(cfg, fin);
      const double n = N;
      for (std::size_t j = 0; j < lim.P.size(); ++j) {
        row.P = std::max(row.P, (fin.P[j] - lim.P[j]).norm());
        row.K = std::max(row.K, (fin.K[j] - lim.K[j]).norm());
        row.Pi = std::max(row.Pi, (n * fin.Pi[j] - lim.Pi[j]).norm());
        row.S = std::max(row.S, (n * fin.S[j]).norm());
        row.M = std::max(row.M, (n * fin.M[j] - lim.M[j]).norm());
        row.phi = std::max(row.phi, (fin_off.phi[j] - lim_off.phi[j]).norm());
        row.psi = std::max(row.psi, (n * fin_off.psi[j] - lim_off.psi[j]).norm());
      }
      row.solved = true;
    } catch (const Error& e) {
      row.note = e.what();
    }
    rep.rows.push_back(row);
  }
  std::vector<double> x;
  std::vector<double> gP, gK, gPi, gS, gM, gphi, gpsi;
  for (const auto& r : rep.rows) {
    if (!r.solved) continue;
    x.push_back(r.N);
    gP.push_back(r.P);
    gK.push_back(r.K);
    gPi.push_back(r.Pi);
    gS.push_back(r.S);
    gM.push_back(r.M);
    gphi.push_back(r.phi);
    gpsi.push_back(r.psi);
  }
  rep.P = fit_loglog_slope(x, gP);
  rep.K = fit_loglog_slope(x, gK);
  rep.Pi = fit_loglog_slope(x, gPi);
  rep.S = fit_loglog_slope(x, gS);
  rep.M = fit_loglog_slope(x, gM);
  rep.phi = fit_loglog_slope(x, gphi);
  rep.psi = fit_loglog_slope(x, gpsi);
  return rep;
}

}  // namespace mfglq
