#include "mfglq/stats.hpp"

#include <algorithm>
#include <cmath>

namespace mfglq {

SlopeFit fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double floor) {
  SlopeFit fit;
  std::vector<double> lx, ly;
  bool all_small = true;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (std::abs(y[i]) >= floor) all_small = false;
    if (y[i] > 0.0 && x[i] > 0.0) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  fit.exact = all_small && !y.empty();
  if (fit.exact || lx.size() < 2) return fit;
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  if (sxx > 0) fit.slope = sxy / sxx;
  return fit;
}

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  if (v.empty()) return r;
  const double n = static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += x;
  r.mean = s / n;
  if (v.size() < 2) return r;
  double ss = 0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / (n - 1) / n);
  return r;
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * v[lo] + w * v[hi];
}

}  // namespace mfglq
