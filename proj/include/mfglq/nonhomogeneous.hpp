#pragma once

#include "mfglq/model.hpp"
#include "mfglq/riccati.hpp"

namespace mfglq {

/// Offset terms of the decoupling ansatz. With deterministic coefficients the
/// backward equations are ODEs and the martingale integrands beta, zeta vanish.
struct NonhomogeneousSolution {
  bool finite = false;
  int N = 0;
  VectorSchedule phi, psi;
  VectorSchedule beta, zeta;
  VectorSchedule Phi;           // Bᵀφ + DᵀPg + D̃ᵀ(P+K)g̃ + D̃ᵀβ - Rη₂ (finite-N: P+K/N in the D term)
  VectorSchedule alpha, gamma;  // drifts dφ/dt, dψ/dt at the nodes
};

NonhomogeneousSolution solve_limit_phi_psi(const GameConfig& cfg, const LimitRiccatiSolutions& sols);
NonhomogeneousSolution solve_finite_N_phi_psi(const GameConfig& cfg, const FiniteNRiccatiSolutions& sols);

}  // namespace mfglq
