#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "plugwatt/error.hpp"

namespace plugwatt {

/// Dense row-major matrix, just enough for least squares.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

struct OlsFit {
  std::vector<double> coef;
  std::vector<double> std_err;
  std::vector<double> residuals;
  double ssr = 0.0;
  double sigma = 0.0;  // sqrt(SSR / (n - k)), k = columns including intercept
  std::size_t n = 0;
  std::size_t k = 0;
};

// Householder QR least squares. A column whose diagonal of R collapses
// relative to its own norm lies in the span of earlier columns and is reported
// together with the columns it depends on.
inline OlsFit ordinary_least_squares(const Matrix& x, std::span<const double> y,
                                     std::span<const std::string> names = {}) {
  const std::size_t n = x.rows(), k = x.cols();
  if (y.size() != n) throw Error("design matrix and target differ in length");
  if (k == 0) throw Error("design matrix has no columns");
  if (n < k + 1) throw InsufficientSample("need at least " + std::to_string(k + 1) + " rows, got " + std::to_string(n));
  auto name = [&](std::size_t j) {
    return j < names.size() ? names[j] : "x" + std::to_string(j);
  };

  Matrix a = x;
  std::vector<double> b(y.begin(), y.end());
  std::vector<double> col_norm(k, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += a(i, j) * a(i, j);
    col_norm[j] = std::sqrt(s);
  }

  constexpr double kRankTol = 1e-10;
  std::vector<double> v(n);
  for (std::size_t j = 0; j < k; ++j) {
    double norm = 0;
    for (std::size_t i = j; i < n; ++i) norm += a(i, j) * a(i, j);
    norm = std::sqrt(norm);
    if (norm <= kRankTol * std::max(col_norm[j], 1e-300)) {
      // back-solve the leading triangle to name the columns j depends on
      std::vector<double> c(j, 0.0);
      for (std::size_t r = j; r-- > 0;) {
        double s = a(r, j);
        for (std::size_t q = r + 1; q < j; ++q) s -= a(r, q) * c[q];
        c[r] = s / a(r, r);
      }
      std::vector<std::string> cols;
      std::string msg = "rank deficient design: column '" + name(j) + "' is collinear with";
      for (std::size_t q = 0; q < j; ++q) {
        if (std::fabs(c[q]) > 1e-8) {
          cols.push_back(name(q));
          msg += " '" + name(q) + "'";
        }
      }
      if (cols.empty()) msg += " nothing (all-zero column)";
      cols.push_back(name(j));
      throw RankDeficient(msg, cols);
    }
    const double alpha = a(j, j) > 0 ? -norm : norm;
    for (std::size_t i = j; i < n; ++i) v[i] = a(i, j);
    v[j] -= alpha;
    double vnorm2 = 0;
    for (std::size_t i = j; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 > 0) {
      for (std::size_t c = j; c < k; ++c) {
        double dot = 0;
        for (std::size_t i = j; i < n; ++i) dot += v[i] * a(i, c);
        const double f = 2.0 * dot / vnorm2;
        for (std::size_t i = j; i < n; ++i) a(i, c) -= f * v[i];
      }
      double dot = 0;
      for (std::size_t i = j; i < n; ++i) dot += v[i] * b[i];
      const double f = 2.0 * dot / vnorm2;
      for (std::size_t i = j; i < n; ++i) b[i] -= f * v[i];
    }
  }

  OlsFit fit;
  fit.n = n;
  fit.k = k;
  fit.coef.assign(k, 0.0);
  for (std::size_t r = k; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < k; ++c) s -= a(r, c) * fit.coef[c];
    fit.coef[r] = s / a(r, r);
  }

  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double pred = 0;
    for (std::size_t j = 0; j < k; ++j) pred += x(i, j) * fit.coef[j];
    fit.residuals[i] = y[i] - pred;
    fit.ssr += fit.residuals[i] * fit.residuals[i];
  }
  fit.sigma = std::sqrt(fit.ssr / static_cast<double>(n - k));

  // Var(coef) = sigma^2 (R^T R)^-1 = sigma^2 R^-1 R^-T; se_j = sigma * ||row j of R^-1||
  Matrix rinv(k, k);
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t r = k; r-- > 0;) {
      double s = (r == c) ? 1.0 : 0.0;
      for (std::size_t q = r + 1; q < k; ++q) s -= a(r, q) * rinv(q, c);
      rinv(r, c) = s / a(r, r);
    }
  }
  fit.std_err.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    double s = 0;
    for (std::size_t c = 0; c < k; ++c) s += rinv(j, c) * rinv(j, c);
    fit.std_err[j] = fit.sigma * std::sqrt(s);
  }
  return fit;
}

}  // namespace plugwatt
