#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "mfglq/errors.hpp"
#include "mfglq/model.hpp"

namespace mfglq {

/// Several matrix unknowns integrated as one system.
using Stack = std::vector<Mat>;

/// Right-hand side dY/dt evaluated with the coefficients frozen at `node`.
/// `stage_time` is the grid time used when reporting a failure.
using StackRhs = std::function<Stack(int node, const Stack& y, double stage_time)>;

/// Applied after each accepted step (e.g. symmetrization).
using StackHook = std::function<void(Stack& y)>;

inline Stack axpy(const Stack& y, double h, const Stack& k) {
  Stack out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + h * k[i];
  return out;
}

inline bool finite(const Stack& y) {
  for (const auto& m : y)
    if (!m.allFinite()) return false;
  return true;
}

/// Classical RK4 run backward from y(T) = terminal. On the step from t_{j+1}
/// to t_j the coefficients are those sampled at node j. Returns the solution
/// at every node, index 0 = t_0.
inline std::vector<Stack> integrate_backward(const TimeGrid& grid, const Stack& terminal, const StackRhs& rhs,
                                             const StackHook& hook = {}) {
  const int M = grid.steps();
  const double h = grid.dt();
  std::vector<Stack> out(M + 1);
  out[M] = terminal;
  for (int j = M - 1; j >= 0; --j) {
    const Stack& y = out[j + 1];
    const double t1 = grid.time(j + 1), t0 = grid.time(j);
    Stack k1 = rhs(j, y, t1);
    Stack k2 = rhs(j, axpy(y, -0.5 * h, k1), t0);
    Stack k3 = rhs(j, axpy(y, -0.5 * h, k2), t0);
    Stack k4 = rhs(j, axpy(y, -h, k3), t0);
    Stack next(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) next[i] = y[i] - (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!finite(next)) throw DivergenceError("non-finite value in backward integration", t0);
    if (hook) hook(next);
    out[j] = std::move(next);
  }
  return out;
}

inline Mat sym(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace mfglq
