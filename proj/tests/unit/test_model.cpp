#include <doctest.h>

#include "mfglq/config_io.hpp"
#include "support/configs.hpp"

using namespace mfglq;
using namespace mfglq::testing;

namespace {

bool clause_fails(const ValidationReport& r, const std::string& needle) {
  for (const auto& c : r.clauses)
    if (!c.pass && c.name.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("grid") {
  const auto g = build_grid(1.0, 4);
  const std::vector<double> expect{0.0, 0.25, 0.5, 0.75, 1.0};
  CHECK(g.times() == expect);
  CHECK(build_grid(1.0, 1000).dt() == doctest::Approx(0.001).epsilon(1e-15));
  CHECK_THROWS_AS(build_grid(0.0, 10), ConfigError);
  CHECK_THROWS_AS(build_grid(1.0, 1), ConfigError);
}

TEST_CASE("validation") {
  const auto prod = production_planning_config({}, 300, 1000, 42);
  CHECK(validate_config(prod).pass());

  auto bad_q = prod;
  for (auto& q : bad_q.cost.Q) q = scalar_matrix(-1.0);
  const auto rq = validate_config(bad_q);
  CHECK_FALSE(rq.pass());
  CHECK(clause_fails(rq, "Q"));

  auto bad_g = random_config(3);
  bad_g.cost.G(0, 1) += 0.5;
  const auto rg = validate_config(bad_g);
  CHECK_FALSE(rg.pass());
  CHECK(clause_fails(rg, "symmetr"));

  auto wrong_len = prod;
  wrong_len.dynamics.A.pop_back();
  CHECK_THROWS_AS(wrong_len.check_structure(), ConfigError);
}

TEST_CASE("production preset mapping") {
  const auto cfg = production_planning_config({}, 300, 1000, 42);
  const auto& d = cfg.dynamics;
  const auto& c = cfg.cost;
  CHECK(cfg.dims.n == 1);
  CHECK(cfg.dims.k == 1);
  CHECK(cfg.dims.N == 300);
  CHECK(d.A[0](0, 0) == doctest::Approx(-0.4));
  CHECK(d.B[0](0, 0) == 0.5);
  CHECK(d.E[0](0, 0) == 0.3);
  CHECK(d.f[0](0) == -2.0);
  CHECK(d.C[0](0, 0) == 0.0);
  CHECK(d.D[0](0, 0) == 0.1);
  CHECK(d.g[0](0) == 0.5);
  CHECK(d.C0[0](0, 0) == 0.1);
  CHECK(d.D0[0](0, 0) == 0.0);
  CHECK(d.g0[0](0) == 0.5);
  CHECK(c.Gamma1[0](0, 0) == 1.0);
  CHECK(c.Gamma0(0, 0) == 0.0);
  CHECK(c.eta0(0) == 2.5);
  CHECK(c.R[0](0, 0) == 10.0);
  CHECK(c.eta2[0](0) == 6.0);
  CHECK(cfg.initial.kind == InitialKind::kUniformBox);
  CHECK(cfg.initial.mean()(0) == 3.0);

  ProductionParams p;
  p.m = 0.0;
  const auto nosharing = production_planning_config(p, 300, 100, 1);
  CHECK(nosharing.dynamics.A[0](0, 0) == doctest::Approx(-0.1));
  CHECK(nosharing.dynamics.E[0](0, 0) == 0.0);

  p = {};
  p.d = 0.0;
  CHECK(production_planning_config(p, 300, 100, 1).dynamics.f[0](0) == 0.0);

  p = {};
  p.r = 0.0;
  CHECK_THROWS_AS(production_planning_config(p, 300, 100, 1), ConfigError);
  p = {};
  p.c = -1.0;
  CHECK_THROWS_AS(production_planning_config(p, 300, 100, 1), ConfigError);
}

TEST_CASE("json round trip") {
  const auto cfg = random_config(11, 2, 2, 20, 8);
  const auto back = config_from_json(config_to_json(cfg));
  CHECK(back.dims.n == cfg.dims.n);
  CHECK(back.grid == cfg.grid);
  CHECK(back.seed == cfg.seed);
  CHECK(sup_diff(back.dynamics.A, cfg.dynamics.A) == 0.0);
  CHECK(sup_diff(back.dynamics.D0, cfg.dynamics.D0) == 0.0);
  CHECK(sup_diff(back.cost.eta2, cfg.cost.eta2) == 0.0);
  CHECK((back.cost.G - cfg.cost.G).norm() == 0.0);
  CHECK((back.initial.covariance - cfg.initial.covariance).norm() == 0.0);

  auto j = config_to_json(cfg);
  j["dims"]["N"] = 1;
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  j = config_to_json(cfg);
  j["dynamics"]["A"] = nlohmann::json::array({1.0, 2.0, 3.0});
  CHECK_THROWS_AS(config_from_json(j), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.json"), ConfigError);
}
