#include <doctest.h>

#include "mfglq/feedback.hpp"
#include "mfglq/nonhomogeneous.hpp"
#include "mfglq/simulator.hpp"
#include "support/configs.hpp"

using namespace mfglq;
using namespace mfglq::testing;

namespace {

struct Centralized {
  FiniteNRiccatiSolutions sols;
  NonhomogeneousSolution off;
  GainSchedule gains;
};

Centralized centralized(const GameConfig& cfg, int N) {
  Centralized c;
  c.sols = solve_finite_N(cfg, N);
  c.off = solve_finite_N_phi_psi(cfg, c.sols);
  c.gains = centralized_gains(c.sols, c.off);
  return c;
}

}  // namespace

TEST_CASE("control decoupled from state") {
  auto cfg = random_config(31);
  const int m = cfg.grid.nodes();
  cfg.dynamics.B = cfg.dynamics.D = cfg.dynamics.D0 = constant_schedule(Mat(Mat::Zero(2, 2)), m);
  const auto c = centralized(cfg, 20);
  CHECK(sup_abs(c.gains.self_gain) < 1e-15);
  CHECK(sup_abs(c.gains.mf_gain) < 1e-15);
  for (int j = 0; j < m; ++j) CHECK((c.gains.offset[j] - cfg.cost.eta2[j]).norm() < 1e-12);

  auto quiet = cfg;
  for (auto& e : quiet.cost.eta2) e.setZero();
  CHECK(sup_abs(centralized(quiet, 20).gains.offset) == 0.0);
}

TEST_CASE("decoupled decentralized gains") {
  const auto cfg = decoupled(random_config(32));
  const auto pipe = build_decentralized(cfg);
  CHECK(sup_abs(pipe.gains.mf_gain) < 1e-15);
  CHECK(sup_abs(pipe.gains.offset) == 0.0);
  for (std::size_t j = 0; j < pipe.gains.self_gain.size(); ++j) {
    const Mat expect = -pipe.sols.calR[j].lu().solve(pipe.sols.Ptilde[j]);
    CHECK((pipe.gains.self_gain[j] - expect).norm() < 1e-12);
  }
  for (int N : {2, 16, 256}) CHECK(gain_distance(centralized(cfg, N).gains, pipe.gains).self < 1e-10);
}

TEST_CASE("centralized gains approach decentralized ones") {
  const auto cfg = production_planning_config({}, 300, 1000, 1);
  const auto pipe = build_decentralized(cfg);
  std::vector<double> x, y;
  for (int N : {16, 32, 64, 128, 256}) {
    x.push_back(N);
    y.push_back(gain_distance(centralized(cfg, N).gains, pipe.gains).max());
  }
  const auto fit = fit_loglog_slope(x, y);
  REQUIRE(fit.slope);
  CHECK(*fit.slope >= -1.3);
  CHECK(*fit.slope <= -0.7);
}

TEST_CASE("stationarity residual") {
  const auto cfg = production_planning_config({}, 300, 1000, 5);
  const int N = 300;
  const auto c = centralized(cfg, N);
  auto perturbed = c.gains;
  for (auto& g : perturbed.self_gain) g *= 1.01;
  double sup = 0.0, sup_perturbed = 0.0, terminal = 0.0;
  for (int sc = 0; sc < 3; ++sc) {
    const auto noise = make_noise(cfg.grid, N, 5, sc);
    const auto init = sample_initials(cfg.initial, N, 5, sc);
    const auto b = simulate_centralized(cfg, c.gains, noise, init);
    const auto adj = reconstruct_adjoints(cfg, c.sols, c.off, b);
    terminal = std::max(terminal, adj.terminal_residual);
    sup = std::max(sup, stationarity_residual(cfg, adj, b).sup);
    const auto bp = simulate_centralized(cfg, perturbed, noise, init);
    sup_perturbed = std::max(sup_perturbed, stationarity_residual(cfg, reconstruct_adjoints(cfg, c.sols, c.off, bp), bp).sup);
  }
  CHECK(terminal < 1e-8);
  CHECK(sup < 1e-8);
  CHECK(sup_perturbed > 1e-4);
}

TEST_CASE("adjoints of the null game") {
  auto cfg = blank_config(2, 1, 4, 50);
  const auto c = centralized(cfg, 4);
  const auto b = simulate_centralized(cfg, c.gains, make_noise(cfg.grid, 4, 1, 0), sample_initials(cfg.initial, 4, 1, 0));
  const auto adj = reconstruct_adjoints(cfg, c.sols, c.off, b);
  CHECK(sup_abs(adj.p_own) == 0.0);
  CHECK(sup_abs(adj.q_own) == 0.0);
  CHECK(sup_abs(adj.q_common) == 0.0);
  const auto r = stationarity_residual(cfg, adj, b);
  CHECK(r.sup == 0.0);
}

TEST_CASE("no control channel gives a zero residual") {
  auto cfg = production_planning_config({}, 10, 200, 1);
  const int m = cfg.grid.nodes();
  cfg.dynamics.B = cfg.dynamics.D = cfg.dynamics.D0 = constant_schedule(scalar_matrix(0.0), m);
  const auto c = centralized(cfg, 10);
  const auto b = simulate_centralized(cfg, c.gains, make_noise(cfg.grid, 10, 1, 0), sample_initials(cfg.initial, 10, 1, 0));
  for (const auto& u : b.controls) CHECK((u.array() == 6.0).all());
  CHECK(stationarity_residual(cfg, reconstruct_adjoints(cfg, c.sols, c.off, b), b).sup == 0.0);
}

TEST_CASE("exchangeable pair") {
  auto cfg = production_planning_config({}, 2, 200, 1);
  cfg.initial.kind = InitialKind::kPointMass;
  cfg.initial.location = Vec::Constant(1, 3.0);
  const auto c = centralized(cfg, 2);
  auto noise = make_noise(cfg.grid, 2, 1, 0);
  noise.dW.row(1) = noise.dW.row(0);
  const auto b = simulate_centralized(cfg, c.gains, noise, sample_initials(cfg.initial, 2, 1, 0));
  const auto adj = reconstruct_adjoints(cfg, c.sols, c.off, b);
  for (const auto& p : adj.p_own) CHECK(p(0, 0) == p(0, 1));
}
