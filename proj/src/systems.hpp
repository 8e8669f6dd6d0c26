#pragma once

#include <vector>

#include "mfglq/ode.hpp"
#include "mfglq/riccati.hpp"

// Stacked backward systems shared by the Riccati and offset solvers. Lower
// levels are prefixes of higher ones and use identical arithmetic, so a
// quantity solved at any level is bitwise the same.
namespace mfglq::detail {

enum Slot { kP = 0, kK, kPi, kS, kM, kPhi, kPsi };
enum Level { kOnlyP = 1, kWithK = 2, kRiccati = 5, kFull = 7 };

struct LimitDerived {
  Mat calR, Ptilde, Ktilde, calRhat;
};
struct OffsetDerived {
  Vec Phi;
};

LimitDerived limit_derived(const GameConfig& cfg, int node, const Mat& P, const Mat& K);
LimitDerived finite_derived(const GameConfig& cfg, int node, int N, const Mat& P, const Mat& K);

Vec limit_Phi(const GameConfig& cfg, int node, const Mat& P, const Mat& K, const Vec& phi);
Vec finite_Phi(const GameConfig& cfg, int node, int N, const Mat& P, const Mat& K, const Vec& phi);

std::vector<Stack> solve_limit_stack(const GameConfig& cfg, int level, const SolveOptions& opt);
std::vector<Stack> solve_finite_stack(const GameConfig& cfg, int N, int level, const SolveOptions& opt);

Stack limit_rhs(const GameConfig& cfg, int node, const Stack& y, double t, int level, const SolveOptions& opt,
                double scale);
Stack finite_rhs(const GameConfig& cfg, int N, int node, const Stack& y, double t, int level,
                 const SolveOptions& opt, double scale);

template <class T>
std::vector<T> column(const std::vector<Stack>& path, int slot) {
  std::vector<T> out;
  out.reserve(path.size());
  for (const auto& y : path) out.push_back(y[slot]);
  return out;
}

}  // namespace mfglq::detail
