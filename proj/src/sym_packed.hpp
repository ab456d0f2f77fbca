#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "common.hpp"

// Helpers for symmetric matrices packed as the row-wise upper triangle.
// The inner product on this layout is the trace form tr(A B), which counts
// every off-diagonal coordinate twice.

namespace expfam {

inline int packed_len(int d) { return d * (d + 1) / 2; }

// Index of entry (i, j), i <= j, in the packed vector.
inline int packed_index(int d, int i, int j) {
  return i * d - i * (i - 1) / 2 + (j - i);
}

inline double packed_weight(int d, int k) {
  // Walk the triangle to find whether k is a diagonal slot.
  int i = 0, row_start = 0;
  while (k >= row_start + (d - i)) {
    row_start += d - i;
    ++i;
  }
  return (k == row_start) ? 1.0 : 2.0;
}

inline double packed_inner(int d, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  int k = 0;
  for (int i = 0; i < d; ++i) {
    s += a[k] * b[k];
    ++k;
    for (int j = i + 1; j < d; ++j, ++k) s += 2.0 * a[k] * b[k];
  }
  return s;
}

inline void unpack_sym(std::span<const double> packed, int d, double* full) {
  int k = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j, ++k) {
      full[i * d + j] = packed[k];
      full[j * d + i] = packed[k];
    }
  }
}

inline Vec pack_sym(const double* full, int d) {
  Vec out(packed_len(d));
  int k = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j, ++k) out[k] = full[i * d + j];
  return out;
}

struct CholeskyPacked {
  bool ok = false;
  int d = 0;
  std::vector<double> lower;  // row-major d x d, lower triangle
  double log_det = 0.0;       // log det of the original matrix
};

// Cholesky of a packed symmetric matrix; fails when a pivot drops below margin
// (the SPD membership test).
inline CholeskyPacked cholesky_packed(std::span<const double> packed, int d, double margin = 1e-12) {
  CholeskyPacked c;
  c.d = d;
  std::vector<double> a(static_cast<size_t>(d) * d);
  unpack_sym(packed, d, a.data());
  c.lower.assign(static_cast<size_t>(d) * d, 0.0);
  double log_det = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[i * d + j];
      for (int k = 0; k < j; ++k) s -= c.lower[i * d + k] * c.lower[j * d + k];
      if (i == j) {
        if (s <= margin) return c;  // ok stays false
        c.lower[i * d + i] = std::sqrt(s);
        log_det += std::log(s);
      } else {
        c.lower[i * d + j] = s / c.lower[j * d + j];
      }
    }
  }
  c.log_det = log_det;
  c.ok = true;
  return c;
}

// Solve L y = b in place.
inline void chol_forward(const CholeskyPacked& c, double* b) {
  for (int i = 0; i < c.d; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= c.lower[i * c.d + k] * b[k];
    b[i] = s / c.lower[i * c.d + i];
  }
}

// Solve L^T y = b in place.
inline void chol_backward(const CholeskyPacked& c, double* b) {
  for (int i = c.d - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < c.d; ++k) s -= c.lower[k * c.d + i] * b[k];
    b[i] = s / c.lower[i * c.d + i];
  }
}

// Inverse of an SPD packed matrix, returned packed.
inline Vec spd_inverse_packed(std::span<const double> packed, int d) {
  CholeskyPacked c = cholesky_packed(packed, d, 0.0);
  if (!c.ok) throw DomainError("spd_inverse_packed: matrix is not positive-definite");
  std::vector<double> inv(static_cast<size_t>(d) * d, 0.0);
  std::vector<double> e(d);
  for (int col = 0; col < d; ++col) {
    std::fill(e.begin(), e.end(), 0.0);
    e[col] = 1.0;
    chol_forward(c, e.data());
    chol_backward(c, e.data());
    for (int i = 0; i < d; ++i) inv[i * d + col] = e[i];
  }
  return pack_sym(inv.data(), d);
}

// x^T M x for packed symmetric M.
inline double packed_quadform(std::span<const double> packed, int d, std::span<const double> x) {
  double s = 0.0;
  int k = 0;
  for (int i = 0; i < d; ++i) {
    s += packed[k] * x[i] * x[i];
    ++k;
    for (int j = i + 1; j < d; ++j, ++k) s += 2.0 * packed[k] * x[i] * x[j];
  }
  return s;
}

}  // namespace expfam
