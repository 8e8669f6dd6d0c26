#pragma once

#include <string>

#include "mfglq/model.hpp"
#include "mfglq/nonhomogeneous.hpp"
#include "mfglq/riccati.hpp"

namespace mfglq {

enum class StrategyKind { kCentralized, kDecentralized, kFixedPoint };
std::string to_string(StrategyKind k);

/// u = self_gain * x_own + mf_gain * x_mean + offset, node by node.
struct GainSchedule {
  StrategyKind kind = StrategyKind::kDecentralized;
  int N = 0;  // agent count for centralized gains
  MatrixSchedule self_gain;
  MatrixSchedule mf_gain;
  VectorSchedule offset;

  /// Gains of the average control: self_gain + mf_gain.
  Mat average_gain(int node) const { return self_gain[node] + mf_gain[node]; }
};

GainSchedule centralized_gains(const FiniteNRiccatiSolutions& sols, const NonhomogeneousSolution& off);
GainSchedule decentralized_gains(const LimitRiccatiSolutions& sols, const NonhomogeneousSolution& off);

/// Limit solutions, offsets and gains of the decentralized strategy.
struct DecentralizedPipeline {
  LimitRiccatiSolutions sols;
  NonhomogeneousSolution off;
  GainSchedule gains;
};
DecentralizedPipeline build_decentralized(const GameConfig& cfg);

/// Sup over nodes of the entrywise max difference of the three schedules.
struct GainDistance {
  double self = 0, mf = 0, offset = 0;
  double max() const;
};
GainDistance gain_distance(const GainSchedule& a, const GainSchedule& b);

struct TrajectoryBundle;

/// Costates rebuilt from the affine ansatz along simulated paths. Per node,
/// each matrix holds one column per agent.
struct AdjointPath {
  bool finite = true;
  int N = 0;
  std::vector<Mat> p_own;    // p_i^i = P x_i + K x_mean + φ
  std::vector<Mat> p_cross;  // j-independent part of p_j^i: Π x_i + M x_mean + ψ (add S x_j)
  std::vector<Mat> q_own;    // integrand of p_i^i on dW_i
  std::vector<Mat> q_common; // integrand of p_i^i on dW_0
  double terminal_residual = 0.0;  // max |p_i^i(T) - terminal condition|
};

/// Centralized bundle with finite-N solutions, or decentralized bundle (using
/// the auxiliary states) with limit solutions.
AdjointPath reconstruct_adjoints(const GameConfig& cfg, const FiniteNRiccatiSolutions& sols,
                                 const NonhomogeneousSolution& off, const TrajectoryBundle& bundle);
AdjointPath reconstruct_adjoints(const GameConfig& cfg, const LimitRiccatiSolutions& sols,
                                 const NonhomogeneousSolution& off, const TrajectoryBundle& bundle);

struct ResidualStats {
  double sup = 0.0;
  double rms = 0.0;
  std::vector<double> per_node_sup;
};

/// Bᵀp_i^i + Dᵀq_ii + D̃ᵀq_i0 + Ru_i - Rη₂ over every node and agent.
ResidualStats stationarity_residual(const GameConfig& cfg, const AdjointPath& adj, const TrajectoryBundle& bundle);

}  // namespace mfglq
