#include "mfglq/nonhomogeneous.hpp"

#include "systems.hpp"

namespace mfglq {

using namespace detail;

namespace {

void check_riccati(const MatrixSchedule& given, const std::vector<Stack>& path, int slot, const char* name) {
  for (std::size_t j = 0; j < path.size(); ++j)
    if (!(given[j].array() == path[j][slot].array()).all())
      throw PreconditionError(std::string(name) + " was not solved from this configuration");
}

template <class RhsFn, class PhiFn>
NonhomogeneousSolution collect(const GameConfig& cfg, const std::vector<Stack>& path, RhsFn rhs, PhiFn phifn) {
  NonhomogeneousSolution out;
  const int m = cfg.grid.nodes();
  const Vec zero = Vec::Zero(cfg.dims.n);
  out.phi = column<Vec>(path, kPhi);
  out.psi = column<Vec>(path, kPsi);
  out.beta.assign(m, zero);
  out.zeta.assign(m, zero);
  out.Phi.resize(m);
  out.alpha.resize(m);
  out.gamma.resize(m);
  for (int j = 0; j < m; ++j) {
    const auto& y = path[j];
    out.Phi[j] = phifn(j, y[kP], y[kK], out.phi[j]);
    const Stack d = rhs(j, y);
    out.alpha[j] = d[kPhi];
    out.gamma[j] = d[kPsi];
  }
  return out;
}

}  // namespace

NonhomogeneousSolution solve_limit_phi_psi(const GameConfig& cfg, const LimitRiccatiSolutions& sols) {
  if (!(sols.grid == cfg.grid)) throw ConfigError("grid mismatch between configuration and solutions");
  const SolveOptions opt;
  const auto path = solve_limit_stack(cfg, kFull, opt);
  check_riccati(sols.P, path, kP, "P");
  check_riccati(sols.K, path, kK, "K");
  const double scale = positivity_scale(cfg);
  auto out = collect(
      cfg, path,
      [&](int j, const Stack& y) { return limit_rhs(cfg, j, y, cfg.grid.time(j), kFull, opt, scale); },
      [&](int j, const Mat& P, const Mat& K, const Vec& phi) { return limit_Phi(cfg, j, P, K, phi); });
  out.finite = false;
  return out;
}

NonhomogeneousSolution solve_finite_N_phi_psi(const GameConfig& cfg, const FiniteNRiccatiSolutions& sols) {
  if (!(sols.grid == cfg.grid)) throw ConfigError("grid mismatch between configuration and solutions");
  const SolveOptions opt;
  const int N = sols.N;
  const auto path = solve_finite_stack(cfg, N, kFull, opt);
  check_riccati(sols.P, path, kP, "P_N");
  check_riccati(sols.K, path, kK, "K_N");
  const double scale = positivity_scale(cfg);
  auto out = collect(
      cfg, path,
      [&](int j, const Stack& y) { return finite_rhs(cfg, N, j, y, cfg.grid.time(j), kFull, opt, scale); },
      [&](int j, const Mat& P, const Mat& K, const Vec& phi) { return finite_Phi(cfg, j, N, P, K, phi); });
  out.finite = true;
  out.N = N;
  return out;
}

}  // namespace mfglq
