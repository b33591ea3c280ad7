#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace warpfield {

using Complex = std::complex<double>;
using VecD = std::vector<double>;

inline constexpr double PI = 3.14159265358979323846;
inline constexpr Complex I_UNIT{0.0, 1.0};

// ---- error taxonomy ------------------------------------------------------

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};
struct InvalidArgumentError : Error { using Error::Error; };
struct UnsupportedOrderError : Error { using Error::Error; };        // derivative order beyond ceiling
struct IncompatibilityError : Error { using Error::Error; };         // mismatched dimensions / classes
struct InsufficientRegularizationError : Error { using Error::Error; };
struct GeometryError : Error { using Error::Error; };                // degenerate bilinear form
struct EvaluationError : Error { using Error::Error; };              // NaN/Inf or non-convergence
struct SchemaError : Error { using Error::Error; };                  // config validation
struct DomainError : Error { using Error::Error; };                  // support escapes the allowed region
struct DivergenceError : Error { using Error::Error; };              // non-finite partial integral
struct LocalIntegrabilityError : Error { using Error::Error; };      // non-finite fiber semi-norm
struct RangeError : Error { using Error::Error; };                   // parameter outside sampled range
struct ConditioningError : Error { using Error::Error; };            // invariant lost to roundoff

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InvalidArgumentError(msg);
}

// ---- multi-indices -------------------------------------------------------

using MultiIndex = std::vector<int>;

inline int mi_order(const MultiIndex& a) {
  return std::accumulate(a.begin(), a.end(), 0);
}

inline MultiIndex mi_zero(int n) { return MultiIndex(n, 0); }

inline bool mi_leq(const MultiIndex& a, const MultiIndex& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

inline MultiIndex mi_sub(const MultiIndex& a, const MultiIndex& b) {
  MultiIndex r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return r;
}

inline double mi_binomial(const MultiIndex& a, const MultiIndex& g) {
  double r = 1.0;
  for (size_t i = 0; i < a.size(); ++i) r *= binomial(a[i], g[i]);
  return r;
}

// enumerate all multi-indices g with g <= a, in lexicographic order
inline std::vector<MultiIndex> mi_below(const MultiIndex& a) {
  std::vector<MultiIndex> out;
  MultiIndex g(a.size(), 0);
  while (true) {
    out.push_back(g);
    size_t i = 0;
    while (i < g.size()) {
      if (g[i] < a[i]) { ++g[i]; break; }
      g[i] = 0;
      ++i;
    }
    if (i == g.size()) break;
  }
  return out;
}

// enumerate all multi-indices of dimension n with total order <= max_order
inline std::vector<MultiIndex> mi_up_to_order(int n, int max_order) {
  std::vector<MultiIndex> out;
  MultiIndex cur(n, 0);
  // depth-first over positions
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == n) { out.push_back(cur); return; }
    for (int v = 0; v <= left; ++v) {
      cur[pos] = v;
      rec(pos + 1, left - v);
    }
    cur[pos] = 0;
  };
  rec(0, max_order);
  return out;
}

// ---- small vector helpers ------------------------------------------------

inline double norm2(const VecD& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double dot(const VecD& a, const VecD& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline VecD vec_add(const VecD& a, const VecD& b) {
  VecD r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline VecD vec_sub(const VecD& a, const VecD& b) {
  VecD r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline VecD vec_scale(double c, const VecD& a) {
  VecD r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = c * a[i];
  return r;
}

// Minkowski pairing with signature (+,-,...,-)
inline double minkowski_pair(const VecD& a, const VecD& b) {
  require(a.size() == b.size() && !a.empty(), "minkowski_pair: dimension mismatch");
  double s = a[0] * b[0];
  for (size_t i = 1; i < a.size(); ++i) s -= a[i] * b[i];
  return s;
}

// ---- dense real matrices (small) ----------------------------------------

struct MatD {
  int rows = 0, cols = 0;
  VecD a;  // row-major
  MatD() = default;
  MatD(int r, int c) : rows(r), cols(c), a(size_t(r) * c, 0.0) {}
  double& operator()(int i, int j) { return a[size_t(i) * cols + j]; }
  double operator()(int i, int j) const { return a[size_t(i) * cols + j]; }
  static MatD identity(int n) {
    MatD m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline MatD mat_mul(const MatD& A, const MatD& B) {
  require(A.cols == B.rows, "mat_mul: shape mismatch");
  MatD C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int k = 0; k < A.cols; ++k) {
      double aik = A(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
    }
  return C;
}

inline MatD mat_transpose(const MatD& A) {
  MatD T(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
  return T;
}

inline VecD mat_apply(const MatD& A, const VecD& x) {
  require(int(x.size()) == A.cols, "mat_apply: shape mismatch");
  VecD y(A.rows, 0.0);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) y[i] += A(i, j) * x[j];
  return y;
}

// determinant via Gaussian elimination with partial pivoting
inline double mat_det(MatD A) {
  require(A.rows == A.cols, "mat_det: square required");
  int n = A.rows;
  double det = 1.0;
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(A(r, c)) > std::abs(A(piv, c))) piv = r;
    if (A(piv, c) == 0.0) return 0.0;
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(A(piv, j), A(c, j));
      det = -det;
    }
    det *= A(c, c);
    for (int r = c + 1; r < n; ++r) {
      double f = A(r, c) / A(c, c);
      for (int j = c; j < n; ++j) A(r, j) -= f * A(c, j);
    }
  }
  return det;
}

inline MatD mat_inverse(const MatD& A0) {
  require(A0.rows == A0.cols, "mat_inverse: square required");
  int n = A0.rows;
  MatD A = A0, B = MatD::identity(n);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r)
      if (std::abs(A(r, c)) > std::abs(A(piv, c))) piv = r;
    require(std::abs(A(piv, c)) > 1e-300, "mat_inverse: singular matrix");
    if (piv != c)
      for (int j = 0; j < n; ++j) {
        std::swap(A(piv, j), A(c, j));
        std::swap(B(piv, j), B(c, j));
      }
    double d = A(c, c);
    for (int j = 0; j < n; ++j) { A(c, j) /= d; B(c, j) /= d; }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      double f = A(r, c);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) { A(r, j) -= f * A(c, j); B(r, j) -= f * B(c, j); }
    }
  }
  return B;
}

// smallest singular value, via eigenvalues of AᵀA (power-iteration-free: valid for n<=3,
// used only for the small bilinear forms handled here)
inline double mat_sigma_min(const MatD& A) {
  require(A.rows == A.cols && A.rows >= 1 && A.rows <= 3, "mat_sigma_min: small square only");
  MatD G = mat_mul(mat_transpose(A), A);
  int n = A.rows;
  if (n == 1) return std::sqrt(G(0, 0));
  if (n == 2) {
    double tr = G(0, 0) + G(1, 1);
    double det = G(0, 0) * G(1, 1) - G(0, 1) * G(1, 0);
    double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
    return std::sqrt(std::max(0.0, tr / 2 - disc));
  }
  // n == 3: bisect the characteristic polynomial on [0, tr]
  auto charpoly = [&](double x) {
    MatD M = G;
    for (int i = 0; i < n; ++i) M(i, i) -= x;
    return mat_det(M);
  };
  double lo = 0.0, hi = G(0, 0) + G(1, 1) + G(2, 2);
  double s_lo = charpoly(lo);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if ((charpoly(mid) > 0) == (s_lo > 0)) lo = mid; else hi = mid;
  }
  return std::sqrt(std::max(0.0, 0.5 * (lo + hi)));
}

}  // namespace warpfield
