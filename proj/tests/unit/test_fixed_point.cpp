#include <doctest.h>

#include "mfglq/fixed_point.hpp"
#include "support/configs.hpp"

using namespace mfglq;
using namespace mfglq::testing;

TEST_CASE("terminal values and zero data") {
  const auto cfg = random_config(41);
  const auto cc = solve_cc_system(cfg);
  const auto& c = cfg.cost;
  CHECK(cc.P.back() == c.G);
  CHECK((cc.K.back() + c.G * c.Gamma0).norm() < 1e-15);
  CHECK((cc.phi.back() + c.G * c.eta0).norm() < 1e-15);
  CHECK(sup_abs(cc.beta) == 0.0);

  const auto hom = decoupled(cfg);
  const auto h = solve_cc_system(hom);
  CHECK(sup_abs(h.phi) == 0.0);
  CHECK(sup_abs(h.K) == 0.0);
}

TEST_CASE("lyapunov degenerate case") {
  auto cfg = blank_config(2, 1, 10, 100);
  const auto cc = solve_cc_system(cfg);
  CHECK(sup_abs(cc.P) == 0.0);
}

TEST_CASE("method identity") {
  for (std::uint64_t s = 42; s < 47; ++s) {
    const auto cfg = random_config(s);
    const auto pipe = build_decentralized(cfg);
    const auto rep = compare_methods(pipe.sols, pipe.off, solve_cc_system(cfg));
    CHECK(rep.pass);
    CHECK(rep.max() < 1e-10);
    CHECK(rep.positivity_agree);
  }
  const auto prod = production_planning_config({}, 300, 1000, 1);
  const auto pipe = build_decentralized(prod);
  CHECK(compare_methods(pipe.sols, pipe.off, solve_cc_system(prod)).pass);

  const auto faulty = compare_methods(pipe.sols, pipe.off, solve_cc_system(prod, {1e-3}));
  CHECK_FALSE(faulty.pass);
  CHECK(faulty.K >= 1e-3);

  const auto dec = decoupled(random_config(48));
  const auto dp = build_decentralized(dec);
  const auto dc = solve_cc_system(dec);
  CHECK(compare_methods(dp.sols, dp.off, dc).pass);
  CHECK(sup_abs(dp.sols.K) == 0.0);
  CHECK(sup_abs(dc.K) == 0.0);

  auto other = prod;
  other.grid = build_grid(1.0, 500);
  for (auto* s : {&other.dynamics.A, &other.dynamics.B, &other.dynamics.E, &other.dynamics.C, &other.dynamics.D,
                  &other.dynamics.F, &other.dynamics.C0, &other.dynamics.D0, &other.dynamics.F0, &other.cost.Q,
                  &other.cost.R, &other.cost.Gamma1})
    s->resize(501, s->front());
  for (auto* s : {&other.dynamics.f, &other.dynamics.g, &other.dynamics.g0, &other.cost.eta1, &other.cost.eta2})
    s->resize(501, s->front());
  CHECK_THROWS_AS(compare_methods(pipe.sols, pipe.off, solve_cc_system(other)), ConfigError);
}

TEST_CASE("fixed-point gains equal decentralized gains") {
  const auto cfg = production_planning_config({}, 300, 1000, 1);
  const auto pipe = build_decentralized(cfg);
  const auto fp = fixed_point_gains(solve_cc_system(cfg));
  CHECK(fp.kind == StrategyKind::kFixedPoint);
  CHECK(gain_distance(fp, pipe.gains).max() < 1e-10);
}

TEST_CASE("conditional mean") {
  const auto quiet = no_idiosyncratic(production_planning_config({}, 50, 200, 1));
  const auto exact = conditional_mean_check(quiet, solve_cc_system(quiet), {25, 50}, 4, 1);
  for (const auto& r : exact.rows) CHECK(r.gap.mean < 1e-24);

  const auto cfg = production_planning_config({}, 50, 200, 1);
  const auto cc = solve_cc_system(cfg);
  const auto rep = conditional_mean_check(cfg, cc, {25, 50, 100, 200, 400}, 60, 5);
  REQUIRE(rep.slope.slope);
  CHECK(*rep.slope.slope >= -1.4);
  CHECK(*rep.slope.slope <= -0.6);

  const auto single = conditional_mean_check(cfg, cc, {100}, 10, 5);
  CHECK(single.rows.size() == 1);
  CHECK_FALSE(single.slope.slope.has_value());
}
