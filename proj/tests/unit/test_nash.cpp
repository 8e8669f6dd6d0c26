#include <doctest.h>

#include "mfglq/nash.hpp"
#include "support/configs.hpp"

using namespace mfglq;
using namespace mfglq::testing;

TEST_CASE("path cost quadrature") {
  auto cfg = blank_config(1, 1, 2, 100);
  const int m = cfg.grid.nodes();
  std::vector<Mat> zeros(m, Mat::Zero(1, 2));
  std::vector<Vec> zavg(m, Vec::Zero(1));
  CHECK(path_cost(cfg, zeros, zeros, zavg, 0).total() == 0.0);

  for (auto& q : cfg.cost.Q) q = scalar_matrix(1.0);
  for (auto& r : cfg.cost.R) r = scalar_matrix(0.0);
  std::vector<Mat> ones(m, Mat::Ones(1, 2));
  std::vector<Vec> oavg(m, Vec::Ones(1));
  const auto c = path_cost(cfg, ones, zeros, oavg, 1);
  CHECK(c.state == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(c.control == 0.0);
  CHECK(c.terminal == 0.0);
}

TEST_CASE("equilibrium cost breakdown") {
  const auto cfg = production_planning_config({}, 50, 200, 3);
  const auto pipe = build_decentralized(cfg);
  std::vector<TrajectoryBundle> bundles;
  for (int s = 0; s < 20; ++s)
    bundles.push_back(simulate_decentralized(cfg, pipe.gains, make_noise(cfg.grid, 50, 3, s),
                                             sample_initials(cfg.initial, 50, 3, s)));
  const auto rep = evaluate_cost(cfg, bundles, 0);
  CHECK(rep.scenarios == 20);
  CHECK(rep.state.mean >= 0.0);
  CHECK(rep.control.mean >= 0.0);
  CHECK(rep.terminal.mean >= 0.0);
  CHECK(rep.total.mean == doctest::Approx(rep.state.mean + rep.control.mean + rep.terminal.mean));
  CHECK(rep.total.se > 0.0);
}

TEST_CASE("convexity probe") {
  const auto prod = production_planning_config({}, 300, 1000, 1);
  const auto ok = convexity_probe(prod, 100, 7);
  CHECK(ok.pass);
  CHECK(ok.samples.size() == 100);
  CHECK(ok.min_value >= 10.0 * (1.0 - 1e-3));

  const auto bad = convexity_probe(concave_config(), 20, 7);
  CHECK_FALSE(bad.pass);
  CHECK(bad.min_value == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("convergence study degenerate and single N") {
  const auto cfg = no_idiosyncratic(production_planning_config({}, 50, 200, 1));
  const auto rep = convergence_study(cfg, {25, 50, 100}, 5, 1);
  for (const auto& r : rep.rows) {
    CHECK(r.cc1.mean < 1e-12);
    CHECK(r.cc2.mean < 1e-12);
    CHECK(r.cc3.mean < 1e-12);
  }
  const auto single = convergence_study(production_planning_config({}, 50, 200, 1), {50}, 5, 1);
  CHECK_FALSE(single.cc1.slope.has_value());
  CHECK_FALSE(single.cc2.slope.has_value());
  CHECK(single.rows.size() == 1);
}

TEST_CASE("convergence study rates") {
  const auto cfg = production_planning_config({}, 300, 200, 1);
  const auto rep = convergence_study(cfg, {25, 50, 100, 200}, 60, 11);
  for (const auto* fit : {&rep.cc1, &rep.cc2, &rep.cc3}) {
    REQUIRE(fit->slope);
    CHECK(*fit->slope >= -1.4);
    CHECK(*fit->slope <= -0.6);
  }
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    CHECK(rep.rows[i].cc2.mean <= rep.rows[i - 1].cc2.mean + 2 * rep.rows[i - 1].cc2.se);
  CHECK(rep.band(300) > 0.0);
  CHECK(rep.band(300) < rep.band(25));
}

TEST_CASE("deviation test") {
  const auto cfg = production_planning_config({}, 300, 200, 1);
  const auto pipe = build_decentralized(cfg);
  const std::vector<DeviationFamily> fams{DeviationFamily::kConstant, DeviationFamily::kRamp,
                                          DeviationFamily::kFeedback};
  const auto rep = deviation_test(cfg, pipe, 50, fams, {0.0, -0.25, 0.25, 0.5}, 16, 3);
  REQUIRE(rep.points.size() == 12);
  for (const auto& p : rep.points) {
    if (p.amplitude == 0.0) {
      CHECK(p.delta_raw.mean == 0.0);
      CHECK(p.delta.mean == 0.0);
      CHECK(p.gap.mean == 0.0);
    } else {
      CHECK(p.quadratic.mean > 0.0);
    }
  }
  CHECK(rep.min_delta >= -rep.eps - 4 * rep.eps_se);
  CHECK(to_string(DeviationFamily::kRamp) == "ramp");

  // The quadratic part grows like δ².
  const auto& q25 = rep.points[2].quadratic.mean;
  const auto& q50 = rep.points[3].quadratic.mean;
  CHECK(q50 / q25 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("pure control penalty") {
  auto cfg = production_planning_config({}, 20, 200, 1);
  const int m = cfg.grid.nodes();
  cfg.cost.Q = constant_schedule(scalar_matrix(0.0), m);
  cfg.cost.G = scalar_matrix(0.0);
  cfg.cost.eta2 = constant_schedule(scalar_vector(0.0), m);
  const auto pipe = build_decentralized(cfg);
  const auto rep = deviation_test(cfg, pipe, 20, {DeviationFamily::kConstant, DeviationFamily::kFeedback},
                                  {-0.5, -0.1, 0.1, 0.5}, 8, 1);
  for (const auto& p : rep.points) CHECK(p.delta_raw.mean > 0.0);
}
