#include <doctest.h>
#include <json.hpp>

#include <fstream>

#include "mfglq/riccati.hpp"
#include "support/configs.hpp"

using namespace mfglq;
using namespace mfglq::testing;

TEST_CASE("limit P closed forms") {
  auto cfg = blank_config(2, 1, 10, 50);
  cfg.cost.G = Mat::Identity(2, 2);
  for (const auto& P : solve_limit_P(cfg)) CHECK((P - Mat::Identity(2, 2)).norm() == 0.0);

  auto lin = blank_config(1, 1, 10, 40, 2.0);
  for (auto& q : lin.cost.Q) q = scalar_matrix(1.0);
  const auto P = solve_limit_P(lin);
  const auto t = lin.grid.times();
  for (int j = 0; j < lin.grid.nodes(); ++j) CHECK(P[j](0, 0) == doctest::Approx(2.0 - t[j]).epsilon(1e-13));
}

TEST_CASE("terminal conditions") {
  const auto cfg = random_config(5, 2, 2, 12, 100);
  const auto& c = cfg.cost;
  const auto L = solve_limit(cfg);
  CHECK(L.P.back() == c.G);
  CHECK(L.K.back() == Mat(-c.G * c.Gamma0));
  CHECK(L.Pi.back() == Mat(-c.Gamma0.transpose() * c.G));
  CHECK(L.S.back().norm() == 0.0);
  CHECK(L.M.back() == Mat(c.Gamma0.transpose() * c.G * c.Gamma0));
  for (const auto& P : L.P) CHECK((P - P.transpose()).norm() < 1e-12);

  const double n = 12;
  const Mat IG = (Mat::Identity(2, 2) - c.Gamma0 / n).transpose() * c.G;
  const auto F = solve_finite_N(cfg, 12);
  CHECK((F.P.back() - IG).norm() < 1e-15);
  CHECK((F.K.back() + IG * c.Gamma0).norm() < 1e-15);
  CHECK((F.Pi.back() + c.Gamma0.transpose() / n * c.G).norm() < 1e-15);
  CHECK(F.S.back().norm() == 0.0);
  CHECK((F.M.back() - c.Gamma0.transpose() / n * c.G * c.Gamma0).norm() < 1e-15);

  auto prod = production_planning_config({}, 2, 200, 1);
  CHECK(solve_finite_N(prod, 2).P.back()(0, 0) == 1.0);

  auto gam = production_planning_config({}, 300, 200, 1);
  gam.cost.Gamma0 = scalar_matrix(1.0);
  CHECK(solve_limit(gam).K.back()(0, 0) == -1.0);
}

TEST_CASE("S vanishes") {
  for (std::uint64_t s = 1; s <= 4; ++s) {
    const auto cfg = random_config(s);
    CHECK(sup_abs(solve_limit(cfg).S) < 1e-12);
  }
  CHECK(sup_abs(solve_limit(production_planning_config({}, 300, 1000, 1)).S) < 1e-12);
}

TEST_CASE("decoupled collapse") {
  const auto cfg = decoupled(random_config(7));
  const auto L = solve_limit(cfg);
  CHECK(sup_abs(L.K) == 0.0);
  CHECK(sup_abs(L.Pi) == 0.0);
  CHECK(sup_abs(L.M) == 0.0);
  for (int N : {2, 10, 300}) {
    const auto F = solve_finite_N(cfg, N);
    CHECK(sup_abs(F.K) == 0.0);
    CHECK(sup_abs(F.Pi) == 0.0);
    CHECK(sup_abs(F.S) == 0.0);
    CHECK(sup_abs(F.M) == 0.0);
    CHECK(sup_diff(F.P, L.P) < 1e-10);
  }
  const auto gap = asymptotic_gap_study(cfg, {8, 16, 32});
  CHECK(gap.P.exact);
  CHECK(gap.K.exact);
  CHECK_FALSE(gap.P.slope.has_value());
}

TEST_CASE("staged solves agree with the joint solve") {
  const auto cfg = random_config(9);
  const auto P = solve_limit_P(cfg);
  const auto K = solve_limit_K(cfg, P);
  const auto rest = solve_limit_Pi_S_M(cfg, P, K);
  const auto L = solve_limit(cfg);
  CHECK(sup_diff(P, L.P) == 0.0);
  CHECK(sup_diff(K, L.K) == 0.0);
  CHECK(sup_diff(rest.M, L.M) == 0.0);
  auto wrong = P;
  wrong[3](0, 0) += 1e-6;
  CHECK_THROWS_AS(solve_limit_K(cfg, wrong), PreconditionError);
}

TEST_CASE("production oracle") {
  std::ifstream is(MFGLQ_FIXTURE_DIR "/production_oracle.json");
  REQUIRE(is.good());
  const auto oracle = nlohmann::json::parse(is)["values"];
  const auto cfg = production_planning_config({}, 300, 1000, 42);
  const auto L = solve_limit(cfg);
  CHECK(std::abs(L.P[0](0, 0) - oracle["P"].get<double>()) < 1e-6);
  CHECK(std::abs(L.K[0](0, 0) - oracle["K"].get<double>()) < 1e-6);
  CHECK(std::abs(L.Pi[0](0, 0) - oracle["Pi"].get<double>()) < 1e-6);
  CHECK(std::abs(L.M[0](0, 0) - oracle["M"].get<double>()) < 1e-6);
}

TEST_CASE("grid refinement") {
  const double p1 = solve_limit_P(production_planning_config({}, 300, 1000, 1))[0](0, 0);
  const double p2 = solve_limit_P(production_planning_config({}, 300, 2000, 1))[0](0, 0);
  const double p4 = solve_limit_P(production_planning_config({}, 300, 4000, 1))[0](0, 0);
  CHECK(std::abs(p1 - p2) < 1e-8);
  CHECK(std::abs(p2 - p4) <= std::abs(p1 - p2) + 1e-15);
}

TEST_CASE("positivity") {
  const auto prod = production_planning_config({}, 300, 1000, 1);
  CHECK(check_positivity(solve_limit(prod)).pass());
  CHECK(check_positivity(solve_finite_N(prod, 300)).pass());

  auto neg = blank_config(1, 1, 10, 100);
  for (auto& r : neg.cost.R) r = scalar_matrix(-10.0);
  for (auto& q : neg.cost.Q) q = scalar_matrix(0.1);
  neg.cost.G = scalar_matrix(0.1);
  SolveOptions loose;
  loose.enforce_positivity = false;
  const auto rep = check_positivity(solve_limit(neg, loose));
  CHECK_FALSE(rep.pass());
  CHECK(*rep.first_violation == doctest::Approx(1.0));
  try {
    solve_limit(neg);
    FAIL("expected a solvability error");
  } catch (const SolvabilityError& e) {
    CHECK(e.time() == doctest::Approx(1.0));
  }

  auto free_ctrl = random_config(4);
  for (auto& d : free_ctrl.dynamics.D) d.setZero();
  for (auto& d : free_ctrl.dynamics.D0) d.setZero();
  const auto L = solve_limit(free_ctrl);
  for (std::size_t j = 0; j < L.calR.size(); ++j) CHECK((L.calR[j] - free_ctrl.cost.R[j]).norm() == 0.0);
}

TEST_CASE("gap study") {
  const auto cfg = production_planning_config({}, 300, 1000, 1);
  const auto rep = asymptotic_gap_study(cfg, {8, 16, 32, 64, 128, 256, 512});
  REQUIRE(rep.P.slope);
  for (const auto* fit : {&rep.P, &rep.K, &rep.Pi, &rep.M, &rep.phi, &rep.psi}) {
    REQUIRE(fit->slope);
    CHECK(*fit->slope >= -1.3);
    CHECK(*fit->slope <= -0.7);
  }
  CHECK(rep.S.exact);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    CHECK(rep.rows[i].P <= rep.rows[i - 1].P);
    CHECK(rep.rows[i].K <= rep.rows[i - 1].K);
  }
  const auto single = asymptotic_gap_study(cfg, {64});
  CHECK(single.rows.size() == 1);
  CHECK_FALSE(single.P.slope.has_value());
}

TEST_CASE("hamiltonian criterion") {
  auto cfg = production_planning_config({}, 300, 1000, 1);
  const int m = cfg.grid.nodes();
  cfg.dynamics.F0 = constant_schedule(scalar_matrix(0.1), m);
  cfg.dynamics.C0 = constant_schedule(scalar_matrix(0.1), m);
  const auto chk = solvability_hamiltonian(cfg, 0.1, 0.1);
  CHECK(chk.verdict);
  CHECK(chk.Psi.back().isIdentity(0.0));
  const auto L = solve_limit(cfg);
  CHECK(sup_diff(chk.K_from_hamiltonian, L.K) < 1e-8);

  auto noB = cfg;
  noB.dynamics.B = constant_schedule(scalar_matrix(0.0), m);
  CHECK(solvability_hamiltonian(noB, 0.1, 0.1).verdict);

  auto withD0 = cfg;
  withD0.dynamics.D0 = constant_schedule(scalar_matrix(0.2), m);
  CHECK_THROWS_AS(solvability_hamiltonian(withD0, 0.1, 0.1), PreconditionError);
}

TEST_CASE("standard riccati criterion") {
  auto cfg = production_planning_config({}, 300, 1000, 1);
  const int m = cfg.grid.nodes();
  cfg.dynamics.E = constant_schedule(scalar_matrix(1.0), m);
  cfg.cost.Gamma1 = constant_schedule(scalar_matrix(1.0), m);
  cfg.cost.Gamma0 = scalar_matrix(1.0);
  const auto chk = solvability_standard_riccati(cfg, 1.0, 1.0, 1.0);
  CHECK(chk.verdict);
  const auto L = solve_limit(cfg);
  CHECK(sup_diff(chk.K, L.K) < 1e-8);
  for (const auto& k : chk.K) CHECK(k.allFinite());
  CHECK_THROWS_AS(solvability_standard_riccati(cfg, 1.0, 1.0, 1.5), PreconditionError);
}
