#pragma once

#include <optional>
#include <vector>

namespace mfglq {

struct SlopeFit {
  std::optional<double> slope;
  bool exact = false;  // every value below the exactness floor
};

/// Least-squares slope of log(y) against log(x). Values below `floor` count
/// as exact zeros; the slope is omitted when fewer than two positive points remain.
SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double floor = 1e-10);

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Mean and standard error with a fixed (index-order) summation.
MeanSe mean_se(const std::vector<double>& v);

/// Linear-interpolated empirical quantile, q in [0,1].
double quantile(std::vector<double> v, double q);

}  // namespace mfglq
