#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypstab {

using Vector = std::vector<double>;

// All reductions below accumulate strictly left to right. Probe results depend
// on the exact rounding sequence, so do not replace these with std::reduce or
// a BLAS call.

inline void require_same_size(std::span<const double> a, std::span<const double> b,
                              const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch");
  }
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(norm_sq(a)); }

inline Vector scaled(std::span<const double> a, double c) {
  Vector out(a.begin(), a.end());
  for (double& v : out) v *= c;
  return out;
}

inline Vector add(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b, "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline Vector subtract(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b, "subtract");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  require_same_size(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Dense row-major matrix; only used for small Jacobians.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  static Matrix identity(std::size_t n, double diag = 1.0) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = diag;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  /// Returns this^T * v.
  Vector transpose_times(std::span<const double> v) const {
    if (v.size() != rows) throw std::invalid_argument("transpose_times: dimension mismatch");
    Vector out(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < rows; ++i) s += (*this)(i, j) * v[i];
      out[j] = s;
    }
    return out;
  }
};

}  // namespace hypstab
