#include "systems.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace mfglq {

double positivity_scale(const GameConfig& cfg) {
  double s = 1.0;
  for (const auto& R : cfg.cost.R) s = std::max(s, R.norm());
  return s;
}

Mat checked_inverse(const Mat& m, double scale, double time, const std::string& clause, bool enforce) {
  if (enforce) {
    Eigen::SelfAdjointEigenSolver<Mat> es(sym(m), Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    if (!(lo > 1e-9 * scale)) {
      std::ostringstream msg;
      msg << clause << " is not positive definite at t = " << time << " (min eigenvalue " << lo << ")";
      throw SolvabilityError(msg.str(), time, clause);
    }
  }
  return m.partialPivLu().inverse();
}

namespace detail {

namespace {
const Mat& I(Eigen::Index n) {
  thread_local Mat id;
  if (id.rows() != n) id = Mat::Identity(n, n);
  return id;
}
}  // namespace

LimitDerived limit_derived(const GameConfig& cfg, int j, const Mat& P, const Mat& K) {
  const auto s = sample(cfg, j);
  LimitDerived d;
  d.calR = s.R + s.D.transpose() * P * s.D + s.D0.transpose() * P * s.D0;
  d.Ptilde = s.B.transpose() * P + s.D.transpose() * P * s.C + s.D0.transpose() * P * s.C0;
  d.Ktilde = s.B.transpose() * K + s.D.transpose() * P * s.F + s.D0.transpose() * P * s.F0 +
             s.D0.transpose() * K * (s.C0 + s.F0);
  d.calRhat = d.calR + s.D0.transpose() * K * s.D0;
  return d;
}

LimitDerived finite_derived(const GameConfig& cfg, int j, int N, const Mat& P, const Mat& K) {
  const auto s = sample(cfg, j);
  const Mat PK = P + K / N;
  LimitDerived d;
  d.calR = s.R + s.D.transpose() * PK * s.D + s.D0.transpose() * P * s.D0;
  d.Ptilde = s.B.transpose() * P + s.D.transpose() * PK * s.C + s.D0.transpose() * P * s.C0;
  d.Ktilde = s.B.transpose() * K + s.D.transpose() * PK * s.F + s.D0.transpose() * P * s.F0 +
             s.D0.transpose() * K * (s.C0 + s.F0);
  d.calRhat = d.calR + s.D0.transpose() * K * s.D0;
  return d;
}

Vec limit_Phi(const GameConfig& cfg, int j, const Mat& P, const Mat& K, const Vec& phi) {
  const auto s = sample(cfg, j);
  return s.B.transpose() * phi + s.D.transpose() * P * s.g + s.D0.transpose() * (P + K) * s.g0 - s.R * s.eta2;
}

Vec finite_Phi(const GameConfig& cfg, int j, int N, const Mat& P, const Mat& K, const Vec& phi) {
  const auto s = sample(cfg, j);
  return s.B.transpose() * phi + s.D.transpose() * (P + K / N) * s.g + s.D0.transpose() * (P + K) * s.g0 -
         s.R * s.eta2;
}

Stack limit_rhs(const GameConfig& cfg, int j, const Stack& y, double t, int level, const SolveOptions& opt,
                double scale) {
  const auto s = sample(cfg, j);
  const auto& [A, B, E, C, D, F, C0, D0, F0, f, g, g0, Q, R, G1, eta1, eta2] = s;
  const Mat& P = y[kP];
  const Mat Bt = B.transpose(), Dt = D.transpose(), D0t = D0.transpose();
  const Mat At = A.transpose(), Ct = C.transpose(), C0t = C0.transpose(), Et = E.transpose(), Ft = F.transpose(),
            F0t = F0.transpose();

  const Mat calR = R + Dt * P * D + D0t * P * D0;
  const Mat Pt = Bt * P + Dt * P * C + D0t * P * C0;
  const Mat Rinv = checked_inverse(calR, scale, t, "R + D'PD + D~'PD~", opt.enforce_positivity);
  const Mat RinvPt = Rinv * Pt;

  Stack dy(level);
  dy[kP] = -(P * A + At * P + Ct * P * C + C0t * P * C0 - Pt.transpose() * RinvPt + Q);
  if (level == kOnlyP) return dy;

  const Mat& K = y[kK];
  const Mat Kt = Bt * K + Dt * P * F + D0t * P * F0 + D0t * K * (C0 + F0);
  const Mat Rhat = calR + D0t * K * D0;
  const Mat Rhinv = checked_inverse(Rhat, scale, t, "R + D'PD + D~'(P+K)D~", opt.enforce_positivity);
  const Mat Z = Pt + Kt;
  const Mat RhinvZ = Rhinv * Z;
  dy[kK] = -(K * (A + E) + P * E + At * K + Ct * P * F + C0t * (P + K) * F0 + C0t * K * C0 +
             Pt.transpose() * RinvPt - (Pt.transpose() + K * B + C0t * K * D0) * RhinvZ - Q * G1);
  if (level == kWithK) return dy;

  const Mat& Pi = y[kPi];
  const Mat& S = y[kS];
  const Mat& M = y[kM];
  const Mat PPi = P + Pi;
  const Mat G1t = G1.transpose();
  dy[kPi] = -(Pi * A + At * Pi + C0t * Pi * C0 + Et * PPi + Ft * P * C + F0t * PPi * C0 -
              (Pi * B + C0t * Pi * D0 + Ft * P * D + F0t * PPi * D0) * RinvPt - G1t * Q);
  dy[kS] = -(S * A + At * S + Ct * S * C + C0t * S * C0 - (S * B + Ct * S * D + C0t * S * D0) * RinvPt);
  const Mat left = Pi * B + Ft * P * D + C0t * Pi * D0 + F0t * PPi * D0;
  dy[kM] = -(At * M + M * (A + E) + C0t * Pi * F0 + C0t * M * (C0 + F0) + Pi * E + Et * (K + M) + Ft * P * F +
             F0t * PPi * F0 + F0t * (K + M) * (C0 + F0) + left * RinvPt -
             (Pi * B + M * B + C0t * (Pi + M) * D0 + Ft * P * D + F0t * (PPi + K + M) * D0) * RhinvZ + G1t * Q * G1);
  if (level == kRiccati) return dy;

  const Mat& phi = y[kPhi];
  const Mat& psi = y[kPsi];
  const Mat PK = P + K;
  const Mat PiM = Pi + M;
  const Vec Phi = Bt * phi + Dt * P * g + D0t * PK * g0 - R * eta2;
  const Vec RhinvPhi = Rhinv * Phi;
  dy[kPhi] = -(At * phi + PK * f + Ct * P * g + C0t * PK * g0 - (PK * B + Ct * P * D + C0t * PK * D0) * RhinvPhi -
               Q * eta1);
  const Vec fc = f - B * RhinvPhi, gc = g - D * RhinvPhi, g0c = g0 - D0 * RhinvPhi;
  dy[kPsi] = -((A + E).transpose() * psi + Et * phi + PiM * fc + Ft * P * gc + (C0t * PiM + F0t * (PK + PiM)) * g0c +
               G1t * Q * eta1);
  return dy;
}

Stack finite_rhs(const GameConfig& cfg, int N, int j, const Stack& y, double t, int level,
                 const SolveOptions& opt, double scale) {
  const auto s = sample(cfg, j);
  const auto& [A, B, E, C, D, F, C0, D0, F0, f, g, g0, Q, R, G1, eta1, eta2] = s;
  const double n = N;
  const auto dim = A.rows();
  const Mat &P = y[kP], &K = y[kK], &Pi = y[kPi], &S = y[kS], &M = y[kM];
  const Mat Bt = B.transpose(), Dt = D.transpose(), D0t = D0.transpose();
  const Mat At = A.transpose(), Ct = C.transpose(), C0t = C0.transpose(), Et = E.transpose(), Ft = F.transpose(),
            F0t = F0.transpose();

  const Mat PK = P + K / n;
  const Mat RN = R + Dt * PK * D + D0t * P * D0;
  const Mat Pt = Bt * P + Dt * PK * C + D0t * P * C0;
  const Mat Kt = Bt * K + Dt * PK * F + D0t * P * F0 + D0t * K * (C0 + F0);
  const Mat Rh = RN + D0t * K * D0;
  const Mat RNinv = checked_inverse(RN, scale, t, "R + D'(P_N+K_N/N)D + D~'P_N D~", opt.enforce_positivity);
  const Mat Rhinv = checked_inverse(Rh, scale, t, "R + D'(P_N+K_N/N)D + D~'(P_N+K_N)D~", opt.enforce_positivity);
  const Mat Th1 = -RNinv * Pt;
  const Mat Th2 = RNinv * Pt - Rhinv * (Pt + Kt);

  const Mat Ac = A + B * Th1, Ec = E + B * Th2, Cc = C + D * Th1, Fc = F + D * Th2, C0c = C0 + D0 * Th1,
            F0c = F0 + D0 * Th2;
  const Mat Q1 = (I(dim) - G1 / n).transpose() * Q;
  const Mat G1t = G1.transpose();

  const Mat W1 = P + K / n - S - M / n;
  const Mat W2 = P + (n - 1.0) * Pi - S;
  const Mat X1 = S + M / n;
  const Mat X2 = K + n * S + (n - 1.0) * M;
  const Mat EP = P / n + (n - 1.0) / n * Pi - S / n;
  const Mat EK = K / n + S + (n - 1.0) / n * M;
  const Mat shared_P = Et * EP + Ft * W1 * Cc / n + F0t * W2 * C0c / n;
  const Mat shared_K = Et * EK + Ft * (W1 * Fc + n * X1 * (Cc + Fc)) / n + F0t * (W2 * F0c + X2 * (C0c + F0c)) / n;

  Stack dy(level);
  dy[kP] = -(P * Ac + At * P + Ct * PK * Cc + C0t * P * C0c + shared_P + Q1);
  dy[kK] = -(P * Ec + K * (Ac + Ec) + At * K + Ct * PK * Fc + C0t * P * F0c + C0t * K * (C0c + F0c) + shared_K -
             Q1 * G1);
  dy[kPi] = -(Pi * Ac + At * Pi + C0t * Pi * C0c + shared_P - G1t * Q / n);
  dy[kS] = -(S * Ac + At * S + Ct * X1 * Cc + C0t * S * C0c);
  dy[kM] = -((Pi + S) * Ec + M * (Ac + Ec) + At * M + Ct * X1 * Fc + C0t * ((Pi + S) * F0c + M * (C0c + F0c)) +
             shared_K + G1t * Q * G1 / n);
  if (level == kRiccati) return dy;

  const Mat& phi = y[kPhi];
  const Mat& psi = y[kPsi];
  const Vec Phi = Bt * phi + Dt * PK * g + D0t * (P + K) * g0 - R * eta2;
  const Vec theta = -Rhinv * Phi;
  const Vec fc = f + B * theta, gc = g + D * theta, g0c = g0 + D0 * theta;
  const Vec shared = Et * (phi / n + (n - 1.0) / n * psi) + Ft * (W1 + n * X1) * gc / n + F0t * (W2 + X2) * g0c / n;
  const Mat PiSM = Pi + S + M;
  dy[kPhi] = -((P + K) * fc + At * phi + Ct * PK * gc + C0t * (P + K) * g0c + shared - Q1 * eta1);
  dy[kPsi] = -(PiSM * fc + At * psi + Ct * X1 * gc + C0t * PiSM * g0c + shared + G1t * Q * eta1 / n);
  return dy;
}

std::vector<Stack> solve_limit_stack(const GameConfig& cfg, int level, const SolveOptions& opt) {
  cfg.check_structure();
  const auto& c = cfg.cost;
  const Mat& G = c.G;
  Stack term(level);
  term[kP] = G;
  if (level >= kWithK) term[kK] = -G * c.Gamma0;
  if (level >= kRiccati) {
    term[kPi] = -c.Gamma0.transpose() * G;
    term[kS] = Mat::Zero(G.rows(), G.cols());
    term[kM] = c.Gamma0.transpose() * G * c.Gamma0;
  }
  if (level >= kFull) {
    term[kPhi] = -G * c.eta0;
    term[kPsi] = c.Gamma0.transpose() * G * c.eta0;
  }
  const double scale = positivity_scale(cfg);
  auto rhs = [&](int j, const Stack& y, double t) { return limit_rhs(cfg, j, y, t, level, opt, scale); };
  auto hook = [](Stack& y) { y[kP] = sym(y[kP]); };
  return integrate_backward(cfg.grid, term, rhs, hook);
}

std::vector<Stack> solve_finite_stack(const GameConfig& cfg, int N, int level, const SolveOptions& opt) {
  cfg.check_structure();
  if (N < 2) throw PreconditionError("finite-N system requires N >= 2");
  const auto& c = cfg.cost;
  const Mat& G = c.G;
  const auto dim = G.rows();
  const double n = N;
  const Mat IG = (Mat::Identity(dim, dim) - c.Gamma0 / n).transpose() * G;
  Stack term(level);
  term[kP] = IG;
  term[kK] = -IG * c.Gamma0;
  term[kPi] = -c.Gamma0.transpose() / n * G;
  term[kS] = Mat::Zero(dim, dim);
  term[kM] = c.Gamma0.transpose() / n * G * c.Gamma0;
  if (level >= kFull) {
    term[kPhi] = -IG * c.eta0;
    term[kPsi] = c.Gamma0.transpose() / n * G * c.eta0;
  }
  const double scale = positivity_scale(cfg);
  auto rhs = [&](int j, const Stack& y, double t) { return finite_rhs(cfg, N, j, y, t, level, opt, scale); };
  return integrate_backward(cfg.grid, term, rhs);
}

}  // namespace detail
}  // namespace mfglq
