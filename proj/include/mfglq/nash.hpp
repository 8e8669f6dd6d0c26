#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfglq/feedback.hpp"
#include "mfglq/simulator.hpp"
#include "mfglq/stats.hpp"

namespace mfglq {

struct CostBreakdown {
  double state = 0.0;     // ½∫|x - Γ1 x̄ - η1|²_Q
  double control = 0.0;   // ½∫|u - η2|²_R
  double terminal = 0.0;  // ½|x(T) - Γ0 x̄(T) - η0|²_G
  double total() const { return state + control + terminal; }
};

/// Left-endpoint quadrature of one agent's cost along one path.
CostBreakdown path_cost(const GameConfig& cfg, const std::vector<Mat>& states, const std::vector<Mat>& controls,
                        const std::vector<Vec>& average, int agent);

struct CostReport {
  int agent = 0;
  int scenarios = 0;
  MeanSe total, state, control, terminal;
};

CostReport evaluate_cost(const GameConfig& cfg, const std::vector<TrajectoryBundle>& bundles, int agent);

struct ConvexityReport {
  std::vector<double> samples;  // quadratic form at unit-norm controls
  double min_value = 0.0;       // uniform-convexity evidence
  bool pass = false;
};

/// Random piecewise-constant controls with ∫|u|² dt = 1 drive the homogeneous
/// variational system of agent 1 (others uncontrolled); the quadratic form is
/// averaged over `noise_scenarios` shared noise draws.
ConvexityReport convexity_probe(const GameConfig& cfg, int trials, std::uint64_t seed, int noise_scenarios = 8,
                                int pieces = 8);

struct ConvergenceRow {
  int N = 0;
  MeanSe cc1;  // E sup|x̄^(N) - x̄*|²
  MeanSe cc2;  // E sup|x̂^(N) - x̄*|²
  MeanSe cc3;  // E sup|x̂_i - x̄_i|², averaged over agents
  std::vector<double> sup_gap;  // per scenario sup_t |x̂^(N) - x̄*|
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  SlopeFit cc1, cc2, cc3;
  /// q-quantile of sup_t |x̂^(N) - x̄*| interpolated log-log in N.
  double band(int N, double q = 0.975) const;
};

ConvergenceReport convergence_study(const GameConfig& cfg, const std::vector<int>& N_list, int scenarios,
                                    std::uint64_t seed);
ConvergenceReport convergence_study(const GameConfig& cfg, const DecentralizedPipeline& pipe,
                                    const std::vector<int>& N_list, int scenarios, std::uint64_t seed);

enum class DeviationFamily { kConstant, kRamp, kFeedback };
std::string to_string(DeviationFamily f);

struct DeviationPoint {
  DeviationFamily family = DeviationFamily::kConstant;
  double amplitude = 0.0;
  MeanSe delta_raw;  // J(deviated) - J(equilibrium), plain Monte Carlo
  MeanSe delta;      // same estimand, zero-mean control variates subtracted
  MeanSe gap;        // linear part I(δ) of the delta, continuous-time drift form
  MeanSe quadratic;  // ½ J̃(δ v) >= 0
};

struct DeviationReport {
  int N = 0;
  int scenarios = 0;
  std::vector<DeviationPoint> points;
  double min_delta = 0.0;
  double eps_literal = 0.0;  // max(0, -min delta)
  double eps = 0.0;          // max(0, -min I(δ)), the gap-based estimate
  double eps_se = 0.0;       // standard error of the minimizing I(δ)
};

/// Agent 1 deviates by δ·v while the others keep their decentralized controls.
/// delta = quadratic + linear part exactly, path by path. The linear part is
/// estimated through the costate pairing Y = <λ_1, x̃_1> + <λ_c, x̃^(N)>: its
/// Itô drift cancels the O(1) terms of the running cost algebraically, so what
/// remains is the O(1/N) gap without the O(dt) bias of the Euler scheme.
DeviationReport deviation_test(const GameConfig& cfg, const DecentralizedPipeline& pipe, int N,
                               const std::vector<DeviationFamily>& families, const std::vector<double>& amplitudes,
                               int scenarios, std::uint64_t seed);

}  // namespace mfglq
