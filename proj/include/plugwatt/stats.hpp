#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "plugwatt/error.hpp"

namespace plugwatt::stats {

inline double mean(std::span<const double> xs) {
  if (xs.empty()) throw InsufficientSample("mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

/// Unbiased (n-1) variance.
inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) throw InsufficientSample("variance needs at least 2 values");
  double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

inline double sample_sd(std::span<const double> xs) {
  return std::sqrt(sample_variance(xs));
}

inline double population_variance(std::span<const double> xs) {
  if (xs.empty()) throw InsufficientSample("variance of empty sample");
  double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size());
}

// Linear interpolation between order statistics (Hyndman-Fan type 7).
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InsufficientSample("quantile of empty sample");
  q = std::clamp(q, 0.0, 1.0);
  double h = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(h));
  auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> xs, double q) {
  std::sort(xs.begin(), xs.end());
  return quantile_sorted(xs, q);
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InsufficientSample("correlation needs two equal-length series of >= 2");
  double mx = mean(x), my = mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

struct FiveNumber {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
  std::size_t n = 0;
};

inline FiveNumber five_number(std::vector<double> xs) {
  if (xs.empty()) throw InsufficientSample("summary of empty sample");
  std::sort(xs.begin(), xs.end());
  FiveNumber f;
  f.n = xs.size();
  f.min = xs.front();
  f.max = xs.back();
  f.q1 = quantile_sorted(xs, 0.25);
  f.median = quantile_sorted(xs, 0.5);
  f.q3 = quantile_sorted(xs, 0.75);
  f.mean = mean(xs);
  return f;
}

}  // namespace plugwatt::stats
