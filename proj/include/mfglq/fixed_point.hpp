#pragma once

#include <vector>

#include "mfglq/feedback.hpp"
#include "mfglq/model.hpp"
#include "mfglq/riccati.hpp"
#include "mfglq/stats.hpp"

namespace mfglq {

/// Coefficients of the auxiliary limiting problem, m = P̌x + Ǩz + φ̌.
struct CCSolutions {
  TimeGrid grid;
  MatrixSchedule P, K;
  VectorSchedule phi, beta;  // beta ≡ 0 for deterministic data
  MatrixSchedule calR, Ptilde, Ktilde, calRhat;
  VectorSchedule Phi;
  PositivityReport positivity;
};

struct CCOptions {
  double K_terminal_perturbation = 0.0;  // added to every entry of Ǩ(T); fault injection only
};

/// Assembled from the closed-loop dynamics of the frozen-mean-field problem,
/// not from the direct-method code.
CCSolutions solve_cc_system(const GameConfig& cfg, const CCOptions& opt = {});

GainSchedule fixed_point_gains(const CCSolutions& cc);

struct IdentityReport {
  double P = 0, K = 0, phi = 0;
  double self_gain = 0, mf_gain = 0, offset = 0;
  bool positivity_agree = true;
  double tolerance = 1e-10;
  bool pass = false;
  double max() const;
};

IdentityReport compare_methods(const LimitRiccatiSolutions& sols, const NonhomogeneousSolution& off,
                               const CCSolutions& cc);

struct SLLNRow {
  int N = 0;
  MeanSe gap;  // E sup_t |average of x̄*_i - x̄*|²
};

struct SLLNReport {
  std::vector<SLLNRow> rows;
  SlopeFit slope;
};

/// Decentralized simulation under the fixed-point gains; the cross-agent
/// average of the auxiliary states is compared with x̄* on the same W₀ path.
SLLNReport conditional_mean_check(const GameConfig& cfg, const CCSolutions& cc, const std::vector<int>& N_list,
                                  int scenarios, std::uint64_t seed);

}  // namespace mfglq
