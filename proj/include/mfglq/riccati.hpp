#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfglq/model.hpp"
#include "mfglq/stats.hpp"

namespace mfglq {

struct SolveOptions {
  // When false, indefinite 𝓡-type matrices are inverted anyway (LU) so that
  // check_positivity can inspect the result afterwards.
  bool enforce_positivity = true;
};

struct LimitRiccatiSolutions {
  TimeGrid grid;
  MatrixSchedule P, K, Pi, S, M;
  MatrixSchedule calR;     // R + DᵀPD + D̃ᵀPD̃
  MatrixSchedule Ptilde;   // BᵀP + DᵀPC + D̃ᵀPC̃
  MatrixSchedule Ktilde;   // BᵀK + DᵀPF + D̃ᵀPF̃ + D̃ᵀK(C̃+F̃)
  MatrixSchedule calRhat;  // 𝓡 + D̃ᵀKD̃
  double scale = 1.0;      // max(1, sup‖R‖), used for positivity floors

  MatrixSchedule N() const;  // P + K
};

struct FiniteNRiccatiSolutions {
  TimeGrid grid;
  int N = 2;
  MatrixSchedule P, K, Pi, S, M;
  MatrixSchedule calR;     // R + Dᵀ(P+K/N)D + D̃ᵀPD̃
  MatrixSchedule Ptilde;   // BᵀP + Dᵀ(P+K/N)C + D̃ᵀPC̃
  MatrixSchedule Ktilde;   // BᵀK + Dᵀ(P+K/N)F + D̃ᵀPF̃ + D̃ᵀK(C̃+F̃)
  MatrixSchedule calRhat;  // 𝓡_N + D̃ᵀKD̃
  double scale = 1.0;
};

/// Minimum eigenvalue of the symmetric part of an 𝓡-type matrix must exceed
/// 1e-9 * scale; the inverse is taken by LU since 𝓡_N need not be symmetric.
Mat checked_inverse(const Mat& m, double scale, double time, const std::string& clause, bool enforce = true);
double positivity_scale(const GameConfig& cfg);

MatrixSchedule solve_limit_P(const GameConfig& cfg, const SolveOptions& opt = {});
/// P is re-integrated alongside K so that every RK4 stage sees consistent
/// intermediate values; `P` must match that result.
MatrixSchedule solve_limit_K(const GameConfig& cfg, const MatrixSchedule& P, const SolveOptions& opt = {});
struct PiSM {
  MatrixSchedule Pi, S, M;
};
PiSM solve_limit_Pi_S_M(const GameConfig& cfg, const MatrixSchedule& P, const MatrixSchedule& K,
                        const SolveOptions& opt = {});
LimitRiccatiSolutions solve_limit(const GameConfig& cfg, const SolveOptions& opt = {});

FiniteNRiccatiSolutions solve_finite_N(const GameConfig& cfg, int N, const SolveOptions& opt = {});

struct PositivityReport {
  std::vector<double> min_eig_R;     // per node, 𝓡 (or 𝓡_N)
  std::vector<double> min_eig_Rhat;  // per node, 𝓡 + D̃ᵀKD̃ (or finite-N analogue)
  double threshold = 0.0;
  std::optional<double> first_violation;  // latest grid time failing, scanning backward from T
  bool pass() const { return !first_violation.has_value(); }
};

PositivityReport check_positivity(const LimitRiccatiSolutions& sols);
PositivityReport check_positivity(const FiniteNRiccatiSolutions& sols);

struct SolvabilityCheck {
  std::vector<double> deltas;
  std::vector<Mat> H;    // per node, 2n x 2n
  std::vector<Mat> Psi;  // per node, Psi(T) = I
  std::vector<double> min_singular;
  MatrixSchedule K_from_hamiltonian;  // V U^{-1} - P where defined
  bool verdict = false;
  std::optional<double> first_singular_time;
};

/// Hamiltonian criterion; requires D̃ ≡ 0, F̃ = δ₁I, C̃ = δ₂I.
SolvabilityCheck solvability_hamiltonian(const GameConfig& cfg, double delta1, double delta2);

struct StandardRiccatiCheck {
  std::vector<double> deltas;
  MatrixSchedule Nsum;  // N = P + K
  MatrixSchedule K;
  bool verdict = false;
  std::string note;
};

/// Standard-Riccati criterion; requires F = F̃ ≡ 0, E = δ₃I, Γ1 = δ₄I, Γ0 = δ₅I, δ in (0,1].
StandardRiccatiCheck solvability_standard_riccati(const GameConfig& cfg, double delta3, double delta4,
                                                  double delta5);

struct GapRow {
  int N = 0;
  bool solved = false;
  std::string note;
  double P = 0, K = 0, Pi = 0, S = 0, M = 0;  // sup_t of ‖P_N-P‖, ‖K_N-K‖, ‖NΠ_N-Π‖, ‖NS_N‖, ‖NM_N-M‖
  double phi = 0, psi = 0;                    // sup_t |φ_N-φ|, |Nψ_N-ψ|
};

struct GapReport {
  std::vector<GapRow> rows;
  SlopeFit P, K, Pi, S, M, phi, psi;
};

GapReport asymptotic_gap_study(const GameConfig& cfg, const std::vector<int>& N_list);

}  // namespace mfglq
