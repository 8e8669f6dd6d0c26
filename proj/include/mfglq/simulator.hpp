#pragma once

#include <cstdint>
#include <vector>

#include "mfglq/feedback.hpp"
#include "mfglq/model.hpp"

namespace mfglq {

/// Independent normal streams derived from (seed, scenario, domain, id), so
/// agent i and the common noise see the same draws whatever N is.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t scenario, std::uint64_t domain, std::uint64_t id);

struct NoiseBundle {
  std::uint64_t seed = 0;
  std::uint64_t scenario = 0;
  int N = 0;
  double dt = 0.0;
  Mat dW;   // N x M, column j = increments of every agent on [t_j, t_{j+1})
  Vec dW0;  // M, common increments
};

NoiseBundle make_noise(const TimeGrid& grid, int N, std::uint64_t seed, std::uint64_t scenario);
/// All increments zero.
NoiseBundle zero_noise(const TimeGrid& grid, int N);

struct InitialSample {
  Mat xi;    // n x N
  Vec mean;  // law mean, used as the mean-field initial value
};

InitialSample sample_initials(const InitialStateLaw& law, int N, std::uint64_t seed, std::uint64_t scenario = 0);

struct TrajectoryBundle {
  std::uint64_t scenario = 0;
  int N = 0;
  StrategyKind kind = StrategyKind::kCentralized;
  std::vector<Mat> states;    // per node, n x N: x_i (centralized) or realized x̂_i (decentralized)
  std::vector<Mat> controls;  // per node, k x N
  std::vector<Vec> average;   // x^(N) or x̂^(N)
  // decentralized runs only
  std::vector<Vec> mean_field;   // x̄*
  std::vector<Mat> aux_states;   // x̄_i
  std::vector<Vec> aux_average;  // x̄^(N)
  NoiseBundle noise;
};

/// One Euler–Maruyama step for a block of states sharing the mean `xbar`.
/// `dW` holds one increment per column (ignored when empty).
Mat euler_step(const CoefficientSample& s, const Mat& X, const Mat& U, const Vec& xbar, double dt,
               const Eigen::Ref<const Vec>& dW, double dW0, bool idiosyncratic = true);

/// Controls for a block of states: self * X + (mf * xbar + offset) 1ᵀ.
Mat apply_gains(const GainSchedule& gains, int node, const Mat& X, const Vec& xbar);

TrajectoryBundle simulate_centralized(const GameConfig& cfg, const GainSchedule& gains, const NoiseBundle& noise,
                                      const InitialSample& init);

/// Mean-field path driven by the common noise only, started at `xbar0`.
std::vector<Vec> simulate_mean_field(const GameConfig& cfg, const GainSchedule& gains, const Vec& dW0,
                                     const Vec& xbar0);

TrajectoryBundle simulate_decentralized(const GameConfig& cfg, const GainSchedule& gains, const NoiseBundle& noise,
                                        const InitialSample& init);

}  // namespace mfglq
