#include "mfglq/fixed_point.hpp"

#include <algorithm>

#include "mfglq/ode.hpp"
#include "mfglq/parallel.hpp"
#include "mfglq/simulator.hpp"

namespace mfglq {

namespace {

// Feedback of the auxiliary problem: u = T1 x + T2 z + th, where z is the
// frozen conditional mean.
struct CCFeedback {
  Mat calR, Ptilde, Ktilde, calRhat;
  Mat T1, T2;
  Vec Phi, th;
};

CCFeedback cc_feedback(const CoefficientSample& s, const Mat& P, const Mat& K, const Vec* phi, double scale,
                       double t) {
  CCFeedback fb;
  // Stationarity Bᵀm + Dᵀn + D̃ᵀn₀ + R(u - η₂) = 0 with the diffusion
  // coefficients n, n₀ of m expanded in (x, z, 1).
  fb.calR = s.R + s.D.transpose() * P * s.D + s.D0.transpose() * P * s.D0;
  fb.Ptilde = s.B.transpose() * P + s.D.transpose() * P * s.C + s.D0.transpose() * P * s.C0;
  fb.Ktilde = s.B.transpose() * K + s.D.transpose() * P * s.F + s.D0.transpose() * P * s.F0 +
              s.D0.transpose() * K * (s.C0 + s.F0);
  fb.calRhat = fb.calR + s.D0.transpose() * K * s.D0;
  const Mat Ri = checked_inverse(fb.calR, scale, t, "R + D'P^D + D~'P^D~");
  const Mat Rhi = checked_inverse(fb.calRhat, scale, t, "R + D'P^D + D~'(P^+K^)D~");
  fb.T1 = -Ri * fb.Ptilde;
  fb.T2 = -Rhi * (fb.Ptilde + fb.Ktilde) - fb.T1;
  if (phi) {
    const Mat PK = P + K;
    fb.Phi = s.B.transpose() * *phi + s.D.transpose() * P * s.g + s.D0.transpose() * PK * s.g0 - s.R * s.eta2;
    fb.th = -Rhi * fb.Phi;
  }
  return fb;
}

}  // namespace

CCSolutions solve_cc_system(const GameConfig& cfg, const CCOptions& opt) {
  cfg.check_structure();
  const auto n = cfg.dims.n;
  const double scale = positivity_scale(cfg);
  const auto& c = cfg.cost;

  Stack term(3);
  term[0] = c.G;
  term[1] = -c.G * c.Gamma0 + Mat::Constant(n, n, opt.K_terminal_perturbation);
  term[2] = -c.G * c.eta0;

  auto rhs = [&](int j, const Stack& y, double t) {
    const auto s = sample(cfg, j);
    const Mat& P = y[0];
    const Mat& K = y[1];
    const Vec phi = y[2];
    const auto fb = cc_feedback(s, P, K, &phi, scale, t);
    // Closed-loop coefficients of dx on (x, z, 1) in each channel.
    const Mat ax = s.A + s.B * fb.T1, az = s.E + s.B * fb.T2;
    const Vec a1 = s.f + s.B * fb.th;
    const Mat cx = s.C + s.D * fb.T1, cz = s.F + s.D * fb.T2;
    const Vec c1 = s.g + s.D * fb.th;
    const Mat hx = s.C0 + s.D0 * fb.T1, hz = s.F0 + s.D0 * fb.T2;
    const Vec h1 = s.g0 + s.D0 * fb.th;
    // dz: drift (ax+az) z + a1, common diffusion (hx+hz) z + h1.
    const Mat zz = ax + az, hzz = hx + hz;
    // m = P x + K z + φ; drift of m must equal -(Aᵀm + Cᵀn + C̃ᵀn₀ + Q(x - Γ1 z - η1)).
    const Mat nx = P * cx, nz = P * cz;
    const Vec n1 = P * c1;
    const Mat n0x = P * hx, n0z = P * hz + K * hzz;
    const Vec n01 = P * h1 + K * h1;
    const Mat At = s.A.transpose(), Ct = s.C.transpose(), C0t = s.C0.transpose();
    Stack dy(3);
    dy[0] = -(P * ax + At * P + Ct * nx + C0t * n0x + s.Q);
    dy[1] = -(P * az + K * zz + At * K + Ct * nz + C0t * n0z - s.Q * s.Gamma1);
    dy[2] = -(P * a1 + K * a1 + At * phi + Ct * n1 + C0t * n01 - s.Q * s.eta1);
    return dy;
  };
  auto hook = [](Stack& y) { y[0] = sym(y[0]); };
  const auto path = integrate_backward(cfg.grid, term, rhs, hook);

  const int m = cfg.grid.nodes();
  CCSolutions cc;
  cc.grid = cfg.grid;
  cc.P.resize(m);
  cc.K.resize(m);
  cc.phi.resize(m);
  cc.beta.assign(m, Vec::Zero(n));
  cc.calR.resize(m);
  cc.Ptilde.resize(m);
  cc.Ktilde.resize(m);
  cc.calRhat.resize(m);
  cc.Phi.resize(m);
  auto& pos = cc.positivity;
  pos.threshold = 1e-9 * scale;
  pos.min_eig_R.resize(m);
  pos.min_eig_Rhat.resize(m);
  for (int j = 0; j < m; ++j) {
    cc.P[j] = path[j][0];
    cc.K[j] = path[j][1];
    cc.phi[j] = path[j][2];
    const auto s = sample(cfg, j);
    const Vec phi = cc.phi[j];
    const auto fb = cc_feedback(s, cc.P[j], cc.K[j], &phi, scale, cfg.grid.time(j));
    cc.calR[j] = fb.calR;
    cc.Ptilde[j] = fb.Ptilde;
    cc.Ktilde[j] = fb.Ktilde;
    cc.calRhat[j] = fb.calRhat;
    cc.Phi[j] = fb.Phi;
    pos.min_eig_R[j] = Eigen::SelfAdjointEigenSolver<Mat>(sym(fb.calR), Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    pos.min_eig_Rhat[j] =
        Eigen::SelfAdjointEigenSolver<Mat>(sym(fb.calRhat), Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  }
  for (int j = m; j-- > 0;) {
    if (!(pos.min_eig_R[j] > pos.threshold) || !(pos.min_eig_Rhat[j] > pos.threshold)) {
      pos.first_violation = cfg.grid.time(j);
      break;
    }
  }
  return cc;
}

GainSchedule fixed_point_gains(const CCSolutions& cc) {
  const int m = cc.grid.nodes();
  GainSchedule g;
  g.kind = StrategyKind::kFixedPoint;
  g.self_gain.resize(m);
  g.mf_gain.resize(m);
  g.offset.resize(m);
  for (int j = 0; j < m; ++j) {
    const auto Rl = cc.calR[j].partialPivLu();
    const auto Rh = cc.calRhat[j].partialPivLu();
    g.self_gain[j] = -Rl.solve(cc.Ptilde[j]);
    g.mf_gain[j] = Rl.solve(cc.Ptilde[j]) - Rh.solve(Mat(cc.Ptilde[j] + cc.Ktilde[j]));
    g.offset[j] = -Rh.solve(cc.Phi[j]);
  }
  return g;
}

double IdentityReport::max() const { return std::max({P, K, phi, self_gain, mf_gain, offset}); }

namespace {

template <class T>
double sup_diff(const std::vector<T>& a, const std::vector<T>& b) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) d = std::max(d, (a[j] - b[j]).cwiseAbs().maxCoeff());
  return d;
}

}  // namespace

IdentityReport compare_methods(const LimitRiccatiSolutions& sols, const NonhomogeneousSolution& off,
                               const CCSolutions& cc) {
  if (!(sols.grid == cc.grid) || off.phi.size() != cc.phi.size()) throw ConfigError("compare_methods: grid mismatch");
  IdentityReport r;
  r.P = sup_diff(sols.P, cc.P);
  r.K = sup_diff(sols.K, cc.K);
  r.phi = sup_diff(off.phi, cc.phi);
  const auto a = decentralized_gains(sols, off);
  const auto b = fixed_point_gains(cc);
  const auto d = gain_distance(a, b);
  r.self_gain = d.self;
  r.mf_gain = d.mf;
  r.offset = d.offset;
  const auto pa = check_positivity(sols);
  r.positivity_agree = pa.pass() == cc.positivity.pass();
  r.pass = r.max() < r.tolerance && r.positivity_agree;
  return r;
}

SLLNReport conditional_mean_check(const GameConfig& cfg, const CCSolutions& cc, const std::vector<int>& N_list,
                                  int scenarios, std::uint64_t seed) {
  const auto gains = fixed_point_gains(cc);
  SLLNReport rep;
  std::vector<double> x, y;
  for (int N : N_list) {
    std::vector<double> gap(scenarios);
    parallel_for(scenarios, [&](int s) {
      const auto noise = make_noise(cfg.grid, N, seed, static_cast<std::uint64_t>(s));
      const auto init = sample_initials(cfg.initial, N, seed, static_cast<std::uint64_t>(s));
      const auto b = simulate_decentralized(cfg, gains, noise, init);
      double g = 0.0;
      for (std::size_t j = 0; j < b.mean_field.size(); ++j)
        g = std::max(g, (b.aux_average[j] - b.mean_field[j]).squaredNorm());
      gap[s] = g;
    });
    SLLNRow row{N, mean_se(gap)};
    x.push_back(N);
    y.push_back(row.gap.mean);
    rep.rows.push_back(row);
  }
  rep.slope = fit_loglog_slope(x, y, 1e-24);
  return rep;
}

}  // namespace mfglq
