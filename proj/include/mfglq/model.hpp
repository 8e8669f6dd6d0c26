#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mfglq/errors.hpp"

namespace mfglq {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using MatrixSchedule = std::vector<Mat>;
using VectorSchedule = std::vector<Vec>;

/// Uniform partition 0 = t_0 < ... < t_M = T.
class TimeGrid {
 public:
  TimeGrid() = default;
  TimeGrid(double horizon, int steps);

  double horizon() const noexcept { return horizon_; }
  int steps() const noexcept { return steps_; }
  int nodes() const noexcept { return steps_ + 1; }
  double dt() const noexcept { return horizon_ / steps_; }
  double time(int j) const noexcept { return j == steps_ ? horizon_ : j * dt(); }
  std::vector<double> times() const;

  bool operator==(const TimeGrid&) const = default;

 private:
  double horizon_ = 1.0;
  int steps_ = 2;
};

TimeGrid build_grid(double horizon, int steps);

struct Dimensions {
  int n = 1;  // state
  int k = 1;  // control
  int N = 2;  // agents
};

/// State-equation coefficients, one sample per grid node (left-constant).
/// The `*0` members multiply the common noise dW_0.
struct DynamicsCoefficients {
  MatrixSchedule A, E, C, F, C0, F0;  // n x n
  MatrixSchedule B, D, D0;            // n x k
  VectorSchedule f, g, g0;            // n
};

struct CostCoefficients {
  MatrixSchedule Q;       // n x n, symmetric, PSD
  MatrixSchedule R;       // k x k, symmetric, possibly indefinite
  MatrixSchedule Gamma1;  // n x n
  VectorSchedule eta1;    // n
  VectorSchedule eta2;    // k
  Mat G;                  // n x n, symmetric, PSD
  Mat Gamma0;             // n x n
  Vec eta0;               // n
};

enum class InitialKind { kPointMass, kUniformBox, kGaussian };

/// i.i.d. law of the initial states. Point mass uses `location`; the uniform
/// box is [lower, upper] componentwise; the gaussian is N(location, cov).
struct InitialStateLaw {
  InitialKind kind = InitialKind::kPointMass;
  Vec location;
  Vec lower, upper;
  Mat covariance;

  Vec mean() const;
  Mat covariance_matrix() const;
};

struct GameConfig {
  Dimensions dims;
  TimeGrid grid;
  DynamicsCoefficients dynamics;
  CostCoefficients cost;
  InitialStateLaw initial;
  std::uint64_t seed = 0;

  /// Throws ConfigError on any shape or length mismatch.
  void check_structure() const;
};

/// Read-only view of every coefficient at one grid node.
struct CoefficientSample {
  const Mat &A, &B, &E, &C, &D, &F, &C0, &D0, &F0;
  const Vec &f, &g, &g0;
  const Mat &Q, &R, &Gamma1;
  const Vec &eta1, &eta2;
};

CoefficientSample sample(const GameConfig& cfg, int node);

struct ValidationClause {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationClause> clauses;
  bool pass() const;
};

ValidationReport validate_config(const GameConfig& cfg);

/// Parameters of the production-planning example (inventory dynamics with
/// loss, mutual inventory sharing and common environmental noise).
struct ProductionParams {
  double r = 0.1;        // loss rate
  double c = 0.5;        // productivity adjustment
  double m = 0.3;        // sharing intensity
  double d = 2.0;        // demand
  double b_tilde = 0.1;  // productivity volatility
  double g = 0.5;        // loss volatility offset (common noise)
  double a_tilde = 0.1;  // loss volatility slope (common noise)
  double g_tilde = 0.5;  // productivity volatility offset (own noise)
  double Q = 1.0;
  double R = 10.0;
  double eta2 = 6.0;
  double G = 1.0;
  double target = 2.5;  // terminal inventory target k
  double inventory_low = 2.5;
  double inventory_high = 3.5;
  double horizon = 1.0;
};

GameConfig production_planning_config(const ProductionParams& params, int agents, int steps,
                                      std::uint64_t seed);

// Schedule helpers.
MatrixSchedule constant_schedule(const Mat& value, int nodes);
VectorSchedule constant_schedule(const Vec& value, int nodes);
Mat scalar_matrix(double v);
Vec scalar_vector(double v);

}  // namespace mfglq
