#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mfglq/io.hpp"
#include "mfglq/stats.hpp"

using namespace mfglq;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream is(path);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "mfglq_unit";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_CASE("schedule csv") {
  const auto g = build_grid(1.0, 2);
  MatrixSchedule P{Mat::Identity(2, 2), 2 * Mat::Identity(2, 2), 3 * Mat::Identity(2, 2)};
  VectorSchedule v{Vec::Constant(1, 0.5), Vec::Constant(1, 1.5), Vec::Constant(1, 2.5)};
  P[0](0, 1) = 7.0;
  const auto path = scratch("sched.csv");
  write_schedule_csv(path, g, {{"P", &P, nullptr}, {"phi", nullptr, &v}});
  std::istringstream in(slurp(path));
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,P_00,P_01,P_10,P_11,phi");
  std::getline(in, line);
  CHECK(line == "0,1,7,0,1,0.5");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("svg and hash") {
  const auto path = scratch("plot.svg");
  write_svg_plot(path, "t", "x", {{"a", {0, 1, 2}, {0, 1, 4}}, {"b", {0, 1, 2}, {1, 1, 1}}});
  const auto text = slurp(path);
  CHECK(text.find("viewBox=\"0 0 800 600\"") != std::string::npos);
  CHECK(text.find("<polyline") != std::string::npos);
  const auto h = file_hash(path);
  CHECK(h.size() == 16);
  CHECK(h == file_hash(path));
  std::ofstream(scratch("empty.txt")).close();
  CHECK(file_hash(scratch("empty.txt")) == "cbf29ce484222325");
}

TEST_CASE("stats") {
  const auto fit = fit_loglog_slope({1, 2, 4, 8}, {1, 0.5, 0.25, 0.125});
  REQUIRE(fit.slope);
  CHECK(*fit.slope == doctest::Approx(-1.0));
  CHECK(fit_loglog_slope({1, 2}, {0, 0}).exact);
  CHECK_FALSE(fit_loglog_slope({1}, {1}).slope.has_value());
  const auto ms = mean_se({1, 2, 3, 4});
  CHECK(ms.mean == 2.5);
  CHECK(ms.se == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(quantile({1, 2, 3, 4, 5}, 0.5) == 3.0);
  CHECK(quantile({0, 10}, 0.25) == 2.5);
}
