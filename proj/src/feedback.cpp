#include "mfglq/feedback.hpp"

#include <algorithm>
#include <cmath>

#include "mfglq/simulator.hpp"

namespace mfglq {

std::string to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::kCentralized:
      return "centralized";
    case StrategyKind::kDecentralized:
      return "decentralized";
    case StrategyKind::kFixedPoint:
      return "fixed-point";
  }
  return "unknown";
}

namespace {

template <class Sols>
GainSchedule gains_from(const Sols& s, const NonhomogeneousSolution& off, const char* what) {
  const int m = s.grid.nodes();
  if (static_cast<int>(off.Phi.size()) != m) throw ConfigError("offset solution does not match the grid");
  GainSchedule g;
  g.self_gain.resize(m);
  g.mf_gain.resize(m);
  g.offset.resize(m);
  for (int j = 0; j < m; ++j) {
    const double t = s.grid.time(j);
    const Mat Rinv = checked_inverse(s.calR[j], s.scale, t, what);
    const Mat Rhinv = checked_inverse(s.calRhat[j], s.scale, t, what);
    const Mat RinvPt = Rinv * s.Ptilde[j];
    g.self_gain[j] = -RinvPt;
    g.mf_gain[j] = RinvPt - Rhinv * (s.Ptilde[j] + s.Ktilde[j]);
    g.offset[j] = -Rhinv * off.Phi[j];
  }
  return g;
}

void require_grid(const TrajectoryBundle& b, std::size_t nodes) {
  if (b.states.size() != nodes) throw ConfigError("trajectory bundle does not match the solution grid");
}

}  // namespace

GainSchedule centralized_gains(const FiniteNRiccatiSolutions& sols, const NonhomogeneousSolution& off) {
  if (!off.finite || off.N != sols.N) throw PreconditionError("centralized gains need finite-N offsets of the same N");
  auto g = gains_from(sols, off, "finite-N R-matrix");
  g.kind = StrategyKind::kCentralized;
  g.N = sols.N;
  return g;
}

GainSchedule decentralized_gains(const LimitRiccatiSolutions& sols, const NonhomogeneousSolution& off) {
  if (off.finite) throw PreconditionError("decentralized gains need limit offsets");
  auto g = gains_from(sols, off, "limit R-matrix");
  g.kind = StrategyKind::kDecentralized;
  return g;
}

DecentralizedPipeline build_decentralized(const GameConfig& cfg) {
  DecentralizedPipeline d;
  d.sols = solve_limit(cfg);
  d.off = solve_limit_phi_psi(cfg, d.sols);
  d.gains = decentralized_gains(d.sols, d.off);
  return d;
}

double GainDistance::max() const { return std::max({self, mf, offset}); }

GainDistance gain_distance(const GainSchedule& a, const GainSchedule& b) {
  if (a.self_gain.size() != b.self_gain.size()) throw ConfigError("gain schedules on different grids");
  GainDistance d;
  for (std::size_t j = 0; j < a.self_gain.size(); ++j) {
    d.self = std::max(d.self, (a.self_gain[j] - b.self_gain[j]).cwiseAbs().maxCoeff());
    d.mf = std::max(d.mf, (a.mf_gain[j] - b.mf_gain[j]).cwiseAbs().maxCoeff());
    d.offset = std::max(d.offset, (a.offset[j] - b.offset[j]).cwiseAbs().maxCoeff());
  }
  return d;
}

namespace {

struct AnsatzView {
  const MatrixSchedule *P, *K, *Pi, *S, *M;
  const VectorSchedule *phi, *psi;
  double own_weight;  // q_own = (P + own_weight * K) σ_i
};

// Average control -(𝓡 + D̃ᵀKD̃)⁻¹((P̃ + K̃) x_mean + Φ) from the gain representation.
template <class Sols>
std::vector<Vec> average_control(const Sols& s, const NonhomogeneousSolution& off, const std::vector<Vec>& xbar) {
  std::vector<Vec> out(xbar.size());
  for (std::size_t j = 0; j < xbar.size(); ++j)
    out[j] = -s.calRhat[j].partialPivLu().solve((s.Ptilde[j] + s.Ktilde[j]) * xbar[j] + off.Phi[j]);
  return out;
}

AdjointPath reconstruct(const GameConfig& cfg, const AnsatzView& v, const std::vector<Mat>& X,
                        const std::vector<Mat>& U, const std::vector<Vec>& xbar, const std::vector<Vec>& ubar,
                        int N, bool finite) {
  const int m = cfg.grid.nodes();
  AdjointPath a;
  a.finite = finite;
  a.N = N;
  a.p_own.resize(m);
  a.p_cross.resize(m);
  a.q_own.resize(m);
  a.q_common.resize(m);
  const auto ones = Eigen::RowVectorXd::Ones(N);
  for (int j = 0; j < m; ++j) {
    const auto s = sample(cfg, j);
    const Mat& P = (*v.P)[j];
    const Mat& K = (*v.K)[j];
    const Vec& mean = xbar[j];
    a.p_own[j] = P * X[j] + (K * mean + (*v.phi)[j]) * ones;
    a.p_cross[j] = (*v.Pi)[j] * X[j] + ((*v.M)[j] * mean + (*v.psi)[j]) * ones;
    const Mat sigma = s.C * X[j] + s.D * U[j] + (s.F * mean + s.g) * ones;
    a.q_own[j] = (P + v.own_weight * K) * sigma;
    const Mat sigma0 = s.C0 * X[j] + s.D0 * U[j] + (s.F0 * mean + s.g0) * ones;
    const Vec sigma0_mean = (s.C0 + s.F0) * mean + s.D0 * ubar[j] + s.g0;
    a.q_common[j] = P * sigma0 + (K * sigma0_mean) * ones;
  }
  const auto& c = cfg.cost;
  const auto n = cfg.dims.n;
  const double w = finite ? 1.0 / N : 0.0;
  const Mat IG = (Mat::Identity(n, n) - w * c.Gamma0).transpose() * c.G;
  const Mat target = IG * (X[m - 1] - (c.Gamma0 * xbar[m - 1] + c.eta0) * ones);
  a.terminal_residual = (a.p_own[m - 1] - target).cwiseAbs().maxCoeff();
  return a;
}

}  // namespace

AdjointPath reconstruct_adjoints(const GameConfig& cfg, const FiniteNRiccatiSolutions& sols,
                                 const NonhomogeneousSolution& off, const TrajectoryBundle& bundle) {
  require_grid(bundle, sols.P.size());
  if (bundle.kind != StrategyKind::kCentralized) throw PreconditionError("finite-N adjoints need a centralized bundle");
  AnsatzView v{&sols.P, &sols.K, &sols.Pi, &sols.S, &sols.M, &off.phi, &off.psi, 1.0 / sols.N};
  return reconstruct(cfg, v, bundle.states, bundle.controls, bundle.average,
                     average_control(sols, off, bundle.average), bundle.N, true);
}

AdjointPath reconstruct_adjoints(const GameConfig& cfg, const LimitRiccatiSolutions& sols,
                                 const NonhomogeneousSolution& off, const TrajectoryBundle& bundle) {
  require_grid(bundle, sols.P.size());
  if (bundle.aux_states.empty()) throw PreconditionError("limit adjoints need a decentralized bundle");
  AnsatzView v{&sols.P, &sols.K, &sols.Pi, &sols.S, &sols.M, &off.phi, &off.psi, 0.0};
  return reconstruct(cfg, v, bundle.aux_states, bundle.controls, bundle.mean_field,
                     average_control(sols, off, bundle.mean_field), bundle.N, false);
}

ResidualStats stationarity_residual(const GameConfig& cfg, const AdjointPath& adj, const TrajectoryBundle& bundle) {
  ResidualStats r;
  const int m = cfg.grid.nodes();
  r.per_node_sup.resize(m);
  double ss = 0.0;
  long count = 0;
  for (int j = 0; j < m; ++j) {
    const auto s = sample(cfg, j);
    const Mat res = s.B.transpose() * adj.p_own[j] + s.D.transpose() * adj.q_own[j] +
                    s.D0.transpose() * adj.q_common[j] + s.R * bundle.controls[j] -
                    (s.R * s.eta2) * Eigen::RowVectorXd::Ones(bundle.controls[j].cols());
    r.per_node_sup[j] = res.cwiseAbs().maxCoeff();
    r.sup = std::max(r.sup, r.per_node_sup[j]);
    ss += res.squaredNorm();
    count += res.size();
  }
  r.rms = count ? std::sqrt(ss / count) : 0.0;
  return r;
}

}  // namespace mfglq
