#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "tcb/errors.hpp"
#include "tcb/sparse_vector.hpp"

namespace tcb {

// Row-major dense matrix of doubles. Small: everything here is at most a few
// hundred rows (IRLS Hessians, Gram matrices of desk-scale corpora).
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

// Lower-triangular L with A = L·Lᵀ; diagonal strictly positive.
struct CholeskyFactor {
  DenseMatrix L;
};

struct NotPositiveDefinite : RuntimeError {
  int pivot;
  explicit NotPositiveDefinite(int pivot_index)
      : RuntimeError("matrix not positive definite at pivot " + std::to_string(pivot_index)),
        pivot(pivot_index) {}
};

namespace detail {

// Plain factorization; returns the failing pivot index, or -1 on success.
inline int cholesky_in_place(const DenseMatrix& A, DenseMatrix& L) {
  const int n = A.rows;
  L = DenseMatrix(n, n);
  for (int j = 0; j < n; ++j) {
    double d = A.at(j, j);
    for (int k = 0; k < j; ++k) d -= L.at(j, k) * L.at(j, k);
    if (d <= 0.0 || !std::isfinite(d)) return j;
    const double ljj = std::sqrt(d);
    L.at(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = A.at(i, j);
      for (int k = 0; k < j; ++k) s -= L.at(i, k) * L.at(j, k);
      L.at(i, j) = s / ljj;
    }
  }
  return -1;
}

}  // namespace detail

// Factors a symmetric matrix. Near-singular inputs are retried with an
// escalating diagonal jitter (1e-10..1e-4 times trace/n, one decade per
// attempt); every applied jitter magnitude is appended to *jitter_log. When
// the ladder is exhausted the error carries the failing pivot index.
inline CholeskyFactor cholesky(const DenseMatrix& A, std::vector<double>* jitter_log = nullptr) {
  if (A.rows != A.cols) throw RuntimeError("cholesky: matrix not square");
  const int n = A.rows;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double a = A.at(i, j), b = A.at(j, i);
      const double tol = 1e-9 * std::max({1.0, std::fabs(a), std::fabs(b)});
      if (std::fabs(a - b) > tol) throw RuntimeError("cholesky: matrix not symmetric");
    }

  CholeskyFactor f;
  int pivot = detail::cholesky_in_place(A, f.L);
  if (pivot < 0) return f;

  double trace = 0.0;
  for (int i = 0; i < n; ++i) trace += A.at(i, i);
  const double base = trace / std::max(1, n);
  for (double level = 1e-10; level <= 1e-4 * 1.0000001; level *= 10.0) {
    const double jitter = level * base;
    DenseMatrix Aj = A;
    for (int i = 0; i < n; ++i) Aj.at(i, i) += jitter;
    if (jitter_log) jitter_log->push_back(jitter);
    pivot = detail::cholesky_in_place(Aj, f.L);
    if (pivot < 0) return f;
  }
  throw NotPositiveDefinite(pivot);
}

// Solves A·x = b given the factor of A: forward then backward substitution.
inline std::vector<double> solve(const CholeskyFactor& factor, const std::vector<double>& b) {
  const int n = factor.L.rows;
  if (static_cast<int>(b.size()) != n) throw RuntimeError("solve: dimension mismatch");
  std::vector<double> y(n), x(n);
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= factor.L.at(i, k) * y[k];
    y[i] = s / factor.L.at(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int k = i + 1; k < n; ++k) s -= factor.L.at(k, i) * x[k];
    x[i] = s / factor.L.at(i, i);
  }
  return x;
}

inline double log_det(const CholeskyFactor& factor) {
  double s = 0.0;
  for (int i = 0; i < factor.L.rows; ++i) s += std::log(factor.L.at(i, i));
  return 2.0 * s;
}

// A⁻¹ from the factor, symmetrized exactly (column solves agree only to
// rounding; the mean of the two triangles is copied into both).
inline DenseMatrix inverse_spd(const CholeskyFactor& factor) {
  const int n = factor.L.rows;
  DenseMatrix inv(n, n);
  std::vector<double> e(n, 0.0);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    const std::vector<double> col = solve(factor, e);
    for (int i = 0; i < n; ++i) inv.at(i, j) = col[i];
    e[j] = 0.0;
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double m = 0.5 * (inv.at(i, j) + inv.at(j, i));
      inv.at(i, j) = m;
      inv.at(j, i) = m;
    }
  return inv;
}

// Merge-style sparse dot product over the shared indices.
inline double dot(const SparseVector& x, const SparseVector& y) {
  double s = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.entries.size() && j < y.entries.size()) {
    const int xi = x.entries[i].index, yj = y.entries[j].index;
    if (xi == yj) {
      s += x.entries[i].weight * y.entries[j].weight;
      ++i;
      ++j;
    } else if (xi < yj) {
      ++i;
    } else {
      ++j;
    }
  }
  return s;
}

// Pairwise linear-kernel matrix. Each unordered pair is computed once and
// mirrored, so the result is bitwise symmetric.
inline DenseMatrix gram_matrix(const std::vector<SparseVector>& vectors) {
  const int n = static_cast<int>(vectors.size());
  DenseMatrix G(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double v = dot(vectors[i], vectors[j]);
      G.at(i, j) = v;
      G.at(j, i) = v;
    }
  return G;
}

// Numerically stable logistic function; no overflow for any finite z.
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace detail {

// Continued fraction for the regularized incomplete beta (modified Lentz).
inline double betacf(double a, double b, double x) {
  constexpr double eps = 1e-12;
  constexpr double fpmin = 1e-300;
  constexpr int max_iter = 500;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  throw RuntimeError("incomplete beta continued fraction did not converge");
}

inline double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// Two-tailed Student-t tail probability: I_{df/(df+t²)}(df/2, 1/2).
inline double student_t_two_tailed_p(double t, int df) {
  if (df <= 0) throw ConfigError("student_t_two_tailed_p: df must be positive");
  if (std::isnan(t)) throw ConfigError("student_t_two_tailed_p: t is NaN");
  if (t == 0.0) return 1.0;
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return detail::reg_inc_beta(df / 2.0, 0.5, x);
}

}  // namespace tcb
