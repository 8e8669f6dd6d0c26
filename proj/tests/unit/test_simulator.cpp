#include <doctest.h>

#include <cmath>

#include "mfglq/feedback.hpp"
#include "mfglq/nonhomogeneous.hpp"
#include "mfglq/simulator.hpp"
#include "support/configs.hpp"

using namespace mfglq;
using namespace mfglq::testing;

TEST_CASE("initial laws") {
  InitialStateLaw pm;
  pm.kind = InitialKind::kPointMass;
  pm.location = Vec::Constant(1, 3.0);
  const auto a = sample_initials(pm, 50, 1);
  CHECK((a.xi.array() == 3.0).all());
  CHECK(a.mean(0) == 3.0);

  InitialStateLaw gz;
  gz.kind = InitialKind::kGaussian;
  gz.location = Vec::Zero(2);
  gz.covariance = Mat::Zero(2, 2);
  CHECK(sample_initials(gz, 10, 1).xi.norm() == 0.0);

  InitialStateLaw box;
  box.kind = InitialKind::kUniformBox;
  box.lower = Vec::Constant(1, 2.5);
  box.upper = Vec::Constant(1, 3.5);
  const double bound = 3.0 / std::sqrt(12.0) / std::sqrt(300.0);
  int inside = 0;
  for (int seed = 0; seed < 200; ++seed) {
    const auto s = sample_initials(box, 300, seed);
    CHECK(s.mean(0) == 3.0);
    CHECK(s.xi.minCoeff() >= 2.5);
    CHECK(s.xi.maxCoeff() <= 3.5);
    if (std::abs(s.xi.mean() - 3.0) <= bound) ++inside;
  }
  CHECK(inside >= 196);
}

TEST_CASE("noise streams") {
  const auto g = build_grid(1.0, 100);
  const auto a = make_noise(g, 10, 7, 3);
  const auto b = make_noise(g, 40, 7, 3);
  CHECK(a.dW0 == b.dW0);
  CHECK(a.dW == b.dW.topRows(10));
  CHECK(make_noise(g, 10, 7, 3).dW == a.dW);
  CHECK(make_noise(g, 10, 8, 3).dW0 != a.dW0);
  CHECK(make_noise(g, 10, 7, 4).dW0 != a.dW0);
  CHECK(zero_noise(g, 10).dW.norm() == 0.0);
  const auto big = make_noise(g, 2000, 1, 0);
  const double var = big.dW.array().square().mean();
  CHECK(var == doctest::Approx(g.dt()).epsilon(0.02));
}

TEST_CASE("null dynamics stay at zero") {
  const auto cfg = blank_config(2, 1, 6, 50);
  const auto pipe = build_decentralized(cfg);
  const auto b = simulate_decentralized(cfg, pipe.gains, zero_noise(cfg.grid, 6), sample_initials(cfg.initial, 6, 1));
  CHECK(sup_abs(b.states) == 0.0);
  CHECK(sup_abs(b.aux_states) == 0.0);
  CHECK(sup_abs(b.mean_field) == 0.0);
  const auto mf = simulate_mean_field(cfg, pipe.gains, Vec::Zero(cfg.grid.steps()), Vec::Zero(2));
  CHECK(sup_abs(mf) == 0.0);
}

TEST_CASE("average consistency and reproducibility") {
  const auto cfg = production_planning_config({}, 40, 200, 3);
  const auto pipe = build_decentralized(cfg);
  const auto noise = make_noise(cfg.grid, 40, 3, 0);
  const auto init = sample_initials(cfg.initial, 40, 3, 0);
  const auto a = simulate_decentralized(cfg, pipe.gains, noise, init);
  const auto b = simulate_decentralized(cfg, pipe.gains, noise, init);
  for (std::size_t j = 0; j < a.states.size(); ++j) {
    CHECK((a.states[j].rowwise().mean() - a.average[j]).norm() < 1e-12);
    CHECK((a.aux_states[j].rowwise().mean() - a.aux_average[j]).norm() < 1e-12);
    CHECK(a.states[j] == b.states[j]);
    CHECK(a.controls[j] == b.controls[j]);
  }
  const auto s = solve_finite_N(cfg, 40);
  const auto gains = centralized_gains(s, solve_finite_N_phi_psi(cfg, s));
  const auto c = simulate_centralized(cfg, gains, noise, init);
  for (std::size_t j = 0; j < c.states.size(); ++j)
    CHECK((c.states[j].rowwise().mean() - c.average[j]).norm() < 1e-12);
}

TEST_CASE("exchangeability") {
  const auto cfg = production_planning_config({}, 5, 100, 3);
  const auto pipe = build_decentralized(cfg);
  const auto noise = make_noise(cfg.grid, 5, 3, 0);
  const auto init = sample_initials(cfg.initial, 5, 3, 0);
  auto pn = noise;
  auto pi = init;
  const std::vector<int> perm{3, 0, 4, 1, 2};
  for (int i = 0; i < 5; ++i) {
    pn.dW.row(i) = noise.dW.row(perm[i]);
    pi.xi.col(i) = init.xi.col(perm[i]);
  }
  const auto a = simulate_decentralized(cfg, pipe.gains, noise, init);
  const auto b = simulate_decentralized(cfg, pipe.gains, pn, pi);
  for (std::size_t j = 0; j < a.aux_states.size(); ++j)
    for (int i = 0; i < 5; ++i) CHECK(b.aux_states[j](0, i) == a.aux_states[j](0, perm[i]));
}

TEST_CASE("mean field without common exposure is deterministic") {
  auto cfg = production_planning_config({}, 10, 200, 3);
  const int m = cfg.grid.nodes();
  cfg.dynamics.C0 = constant_schedule(scalar_matrix(0.0), m);
  cfg.dynamics.g0 = constant_schedule(scalar_vector(0.0), m);
  const auto pipe = build_decentralized(cfg);
  const auto a = simulate_mean_field(cfg, pipe.gains, make_noise(cfg.grid, 1, 1, 0).dW0, cfg.initial.mean());
  const auto b = simulate_mean_field(cfg, pipe.gains, make_noise(cfg.grid, 1, 2, 0).dW0, cfg.initial.mean());
  CHECK(sup_diff(a, b) == 0.0);
}

TEST_CASE("moments of a scalar linear SDE") {
  // dx = a x dt + s dW: E x(T) = x0 e^{aT}, Var x(T) = s² (e^{2aT} - 1) / (2a).
  auto cfg = blank_config(1, 1, 10000, 200);
  const int m = cfg.grid.nodes();
  const double a = -0.5, s = 0.4, x0 = 1.0;
  cfg.dynamics.A = constant_schedule(scalar_matrix(a), m);
  cfg.dynamics.g = constant_schedule(scalar_vector(s), m);
  cfg.initial.location = scalar_vector(x0);
  const auto pipe = build_decentralized(cfg);
  const auto b = simulate_decentralized(cfg, pipe.gains, make_noise(cfg.grid, 10000, 9, 0),
                                        sample_initials(cfg.initial, 10000, 9, 0));
  const Eigen::ArrayXd xT = b.states.back().row(0).transpose().array();
  const double mean = xT.mean();
  const double var = (xT - mean).square().sum() / (xT.size() - 1);
  const double exact_mean = x0 * std::exp(a);
  const double exact_var = s * s * (std::exp(2 * a) - 1) / (2 * a);
  const double se_mean = std::sqrt(exact_var / xT.size());
  const double se_var = exact_var * std::sqrt(2.0 / (xT.size() - 1));
  CHECK(std::abs(mean - exact_mean) < 3 * se_mean + 1e-3);
  CHECK(std::abs(var - exact_var) < 3 * se_var + 1e-3);
}
