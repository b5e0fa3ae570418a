/*
 Copyright 2026 The aasqp Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Dense linear algebra used by every other module: column-major matrices, Cholesky, column-pivoted
// Householder QR (least squares and nullspace bases), a cyclic Jacobi symmetric eigensolver and a
// Francis double-shift QR eigenvalue routine for general square matrices.
//
// Problems in this library are small (a few hundred unknowns), so everything is dense and the
// algorithms favour accuracy and determinism over speed.

#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "aasqp/errors.hpp"

namespace aasqp {

using Index = std::ptrdiff_t;

class Vec {
 public:
  Vec() = default;
  explicit Vec(Index n, double value = 0.0) : data_(static_cast<std::size_t>(n), value) {}
  Vec(std::initializer_list<double> values) : data_(values) {}
  explicit Vec(std::vector<double> values) : data_(std::move(values)) {}

  Index size() const { return static_cast<Index>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double& operator[](Index i) {
    assert(i >= 0 && i < size());
    return data_[static_cast<std::size_t>(i)];
  }
  double operator[](Index i) const {
    assert(i >= 0 && i < size());
    return data_[static_cast<std::size_t>(i)];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  const std::vector<double>& std() const { return data_; }

  void resize(Index n, double value = 0.0) { data_.resize(static_cast<std::size_t>(n), value); }
  void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

  Vec segment(Index start, Index n) const {
    assert(start >= 0 && start + n <= size());
    return Vec(std::vector<double>(data_.begin() + start, data_.begin() + start + n));
  }
  void set_segment(Index start, const Vec& values) {
    assert(start >= 0 && start + values.size() <= size());
    std::copy(values.begin(), values.end(), data_.begin() + start);
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

  Vec& operator+=(const Vec& o) {
    assert(o.size() == size());
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    assert(o.size() == size());
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }

  friend bool operator==(const Vec& a, const Vec& b) { return a.data_ == b.data_; }

 private:
  std::vector<double> data_;
};

inline Vec operator+(Vec a, const Vec& b) { return a += b; }
inline Vec operator-(Vec a, const Vec& b) { return a -= b; }
inline Vec operator*(double s, Vec a) { return a *= s; }
inline Vec operator*(Vec a, double s) { return a *= s; }
inline Vec operator-(Vec a) { return a *= -1.0; }

inline double dot(const Vec& a, const Vec& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) {
  // Scaled to avoid overflow on large residuals.
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double x : a) s += (x / scale) * (x / scale);
  return scale * std::sqrt(s);
}

inline double norm_inf(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

/// y += alpha * x
inline void axpy(double alpha, const Vec& x, Vec& y) {
  assert(x.size() == y.size());
  for (Index i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline Vec concat(std::initializer_list<const Vec*> parts) {
  Index n = 0;
  for (const Vec* p : parts) n += p->size();
  Vec out(n);
  Index k = 0;
  for (const Vec* p : parts) {
    out.set_segment(k, *p);
    k += p->size();
  }
  return out;
}

/// Column-major dense matrix.
class Mat {
 public:
  Mat() = default;
  Mat(Index rows, Index cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), value) {}

  /// Row-major nested initializer, convenient for tests: Mat::from_rows({{1, 2}, {3, 4}}).
  static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const Index r = static_cast<Index>(rows.size());
    const Index c = r == 0 ? 0 : static_cast<Index>(rows.begin()->size());
    Mat m(r, c);
    Index i = 0;
    for (const auto& row : rows) {
      assert(static_cast<Index>(row.size()) == c);
      Index j = 0;
      for (double x : row) m(i, j++) = x;
      ++i;
    }
    return m;
  }

  static Mat identity(Index n) {
    Mat m(n, n);
    for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static Mat diagonal(const Vec& d) {
    Mat m(d.size(), d.size());
    for (Index i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(Index i, Index j) {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<std::size_t>(j * rows_ + i)];
  }
  double operator()(Index i, Index j) const {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<std::size_t>(j * rows_ + i)];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double* col_ptr(Index j) { return data_.data() + j * rows_; }
  const double* col_ptr(Index j) const { return data_.data() + j * rows_; }

  Vec col(Index j) const { return Vec(std::vector<double>(col_ptr(j), col_ptr(j) + rows_)); }
  Vec row(Index i) const {
    Vec r(cols_);
    for (Index j = 0; j < cols_; ++j) r[j] = (*this)(i, j);
    return r;
  }
  void set_col(Index j, const Vec& v) {
    assert(v.size() == rows_);
    std::copy(v.begin(), v.end(), col_ptr(j));
  }
  void set_row(Index i, const Vec& v) {
    assert(v.size() == cols_);
    for (Index j = 0; j < cols_; ++j) (*this)(i, j) = v[j];
  }

  Vec diag() const {
    Vec d(std::min(rows_, cols_));
    for (Index i = 0; i < d.size(); ++i) d[i] = (*this)(i, i);
    return d;
  }

  Mat block(Index i0, Index j0, Index nr, Index nc) const {
    assert(i0 + nr <= rows_ && j0 + nc <= cols_);
    Mat b(nr, nc);
    for (Index j = 0; j < nc; ++j)
      for (Index i = 0; i < nr; ++i) b(i, j) = (*this)(i0 + i, j0 + j);
    return b;
  }
  void set_block(Index i0, Index j0, const Mat& b) {
    assert(i0 + b.rows() <= rows_ && j0 + b.cols() <= cols_);
    for (Index j = 0; j < b.cols(); ++j)
      for (Index i = 0; i < b.rows(); ++i) (*this)(i0 + i, j0 + j) = b(i, j);
  }
  void add_block(Index i0, Index j0, const Mat& b, double scale = 1.0) {
    assert(i0 + b.rows() <= rows_ && j0 + b.cols() <= cols_);
    for (Index j = 0; j < b.cols(); ++j)
      for (Index i = 0; i < b.rows(); ++i) (*this)(i0 + i, j0 + j) += scale * b(i, j);
  }

  Mat transpose() const {
    Mat t(cols_, rows_);
    for (Index j = 0; j < cols_; ++j)
      for (Index i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
    return t;
  }

  void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
  }

  Mat& operator+=(const Mat& o) {
    assert(o.rows_ == rows_ && o.cols_ == cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    assert(o.rows_ == rows_ && o.cols_ == cols_);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Mat& operator*=(double s) {
    for (double& x : data_) x *= s;
    return *this;
  }

  friend bool operator==(const Mat& a, const Mat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

inline Mat operator+(Mat a, const Mat& b) { return a += b; }
inline Mat operator-(Mat a, const Mat& b) { return a -= b; }
inline Mat operator*(double s, Mat a) { return a *= s; }

inline Vec operator*(const Mat& a, const Vec& x) {
  assert(a.cols() == x.size());
  Vec y(a.rows());
  for (Index j = 0; j < a.cols(); ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    const double* c = a.col_ptr(j);
    for (Index i = 0; i < a.rows(); ++i) y[i] += c[i] * xj;
  }
  return y;
}

/// aᵀ·x without forming the transpose.
inline Vec tmul(const Mat& a, const Vec& x) {
  assert(a.rows() == x.size());
  Vec y(a.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    const double* c = a.col_ptr(j);
    double s = 0.0;
    for (Index i = 0; i < a.rows(); ++i) s += c[i] * x[i];
    y[j] = s;
  }
  return y;
}

inline Mat operator*(const Mat& a, const Mat& b) {
  assert(a.cols() == b.rows());
  Mat c(a.rows(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) {
    double* cj = c.col_ptr(j);
    for (Index k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj == 0.0) continue;
      const double* ak = a.col_ptr(k);
      for (Index i = 0; i < a.rows(); ++i) cj[i] += ak[i] * bkj;
    }
  }
  return c;
}

/// aᵀ·b without forming the transpose.
inline Mat tmul(const Mat& a, const Mat& b) {
  assert(a.rows() == b.rows());
  Mat c(a.cols(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) {
    const double* bj = b.col_ptr(j);
    for (Index i = 0; i < a.cols(); ++i) {
      const double* ai = a.col_ptr(i);
      double s = 0.0;
      for (Index k = 0; k < a.rows(); ++k) s += ai[k] * bj[k];
      c(i, j) = s;
    }
  }
  return c;
}

/// Symmetric congruence Zᵀ·M·Z.
inline Mat congruence(const Mat& z, const Mat& m) { return tmul(z, m * z); }

inline Mat outer(const Vec& a, const Vec& b) {
  Mat m(a.size(), b.size());
  for (Index j = 0; j < b.size(); ++j)
    for (Index i = 0; i < a.size(); ++i) m(i, j) = a[i] * b[j];
  return m;
}

inline double norm_fro(const Mat& m) {
  double s = 0.0;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) s += m(i, j) * m(i, j);
  return std::sqrt(s);
}

/// Induced ∞-norm (max absolute row sum).
inline double norm_inf(const Mat& m) {
  double best = 0.0;
  for (Index i = 0; i < m.rows(); ++i) {
    double s = 0.0;
    for (Index j = 0; j < m.cols(); ++j) s += std::abs(m(i, j));
    best = std::max(best, s);
  }
  return best;
}

inline double max_abs(const Mat& m) {
  double best = 0.0;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) best = std::max(best, std::abs(m(i, j)));
  return best;
}

inline bool is_symmetric(const Mat& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  const double scale = std::max(1.0, max_abs(m));
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = j + 1; i < m.rows(); ++i)
      if (std::abs(m(i, j) - m(j, i)) > rel_tol * scale) return false;
  return true;
}

inline Mat symmetrize(const Mat& m) {
  Mat s = m;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = j + 1; i < m.rows(); ++i) s(i, j) = s(j, i) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

inline Mat hstack(const Mat& a, const Mat& b) {
  if (a.cols() == 0) return b.rows() == 0 && a.rows() != 0 ? Mat(a.rows(), 0) : b;
  if (b.cols() == 0) return a;
  assert(a.rows() == b.rows());
  Mat m(a.rows(), a.cols() + b.cols());
  m.set_block(0, 0, a);
  m.set_block(0, a.cols(), b);
  return m;
}

// ---------------------------------------------------------------------------------------------
// Cholesky

/// Lower-triangular L with L·Lᵀ = M. Throws NotPositiveDefinite when a pivot is not positive.
inline Mat cholesky(const Mat& m) {
  if (m.rows() != m.cols()) throw SolverError(ErrorCode::DimensionMismatch, "cholesky: non-square");
  if (!is_symmetric(m, 1e-12)) throw SolverError(ErrorCode::NotSymmetric, "cholesky: input not symmetric");
  const Index n = m.rows();
  Mat l(n, n);
  for (Index j = 0; j < n; ++j) {
    double d = m(j, j);
    for (Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      throw SolverError(ErrorCode::NotPositiveDefinite,
                        "cholesky: pivot " + std::to_string(j) + " = " + std::to_string(d));
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

/// Solves L·Lᵀ·x = b given the Cholesky factor.
inline Vec cholesky_solve(const Mat& l, Vec b) {
  const Index n = l.rows();
  assert(b.size() == n);
  for (Index i = 0; i < n; ++i) {
    double s = b[i];
    for (Index k = 0; k < i; ++k) s -= l(i, k) * b[k];
    b[i] = s / l(i, i);
  }
  for (Index i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (Index k = i + 1; k < n; ++k) s -= l(k, i) * b[k];
    b[i] = s / l(i, i);
  }
  return b;
}

inline Mat cholesky_solve(const Mat& l, const Mat& b) {
  Mat x(b.rows(), b.cols());
  for (Index j = 0; j < b.cols(); ++j) x.set_col(j, cholesky_solve(l, b.col(j)));
  return x;
}

// ---------------------------------------------------------------------------------------------
// Householder QR with column pivoting

/// A·P = Q·R with Q stored as `rank` Householder reflectors below the diagonal of `qr`.
/// Factorization stops once the largest remaining column norm drops below
/// drop_tol·|R(0,0)|, which fixes the numerical rank.
struct QrDecomposition {
  Mat qr;
  Vec beta;                 // reflector scalings, H_k = I − beta_k·v_k·v_kᵀ with v_k(k) = 1
  std::vector<Index> perm;  // column j of R corresponds to column perm[j] of A
  Index rank = 0;

  Index rows() const { return qr.rows(); }
  Index cols() const { return qr.cols(); }

  /// Applies Qᵀ to b in place.
  void apply_qt(Vec& b) const {
    for (Index k = 0; k < rank; ++k) apply_reflector(k, b.data());
  }
  /// Applies Q to b in place.
  void apply_q(Vec& b) const {
    for (Index k = rank - 1; k >= 0; --k) apply_reflector(k, b.data());
  }

  /// Full m×m orthogonal factor.
  Mat q() const {
    const Index m = rows();
    Mat out = Mat::identity(m);
    // Reflector k leaves e_j untouched for k > j.
    for (Index j = 0; j < m; ++j)
      for (Index k = std::min(j, rank - 1); k >= 0; --k) apply_reflector(k, out.col_ptr(j));
    return out;
  }

  /// Upper-trapezoidal rank×cols factor (in permuted column order).
  Mat r() const {
    Mat out(rank, cols());
    for (Index j = 0; j < cols(); ++j)
      for (Index i = 0; i <= std::min(j, rank - 1); ++i) out(i, j) = qr(i, j);
    return out;
  }

 private:
  void apply_reflector(Index k, double* x) const {
    const Index m = rows();
    double s = x[k];
    for (Index i = k + 1; i < m; ++i) s += qr(i, k) * x[i];
    s *= beta[k];
    x[k] -= s;
    for (Index i = k + 1; i < m; ++i) x[i] -= s * qr(i, k);
  }
};

inline QrDecomposition pivoted_qr(const Mat& a, double drop_tol = 1e-12) {
  const Index m = a.rows();
  const Index n = a.cols();
  QrDecomposition f;
  f.qr = a;
  f.beta = Vec(std::min(m, n));
  f.perm.resize(static_cast<std::size_t>(n));
  std::iota(f.perm.begin(), f.perm.end(), Index{0});
  Mat& qr = f.qr;
  double first_pivot = 0.0;
  // Squared norms of the trailing column parts, downdated after every reflection and recomputed
  // when cancellation makes the downdate unreliable.
  auto trailing_norm2 = [&](Index j, Index k) {
    double s = 0.0;
    for (Index i = k; i < m; ++i) s += qr(i, j) * qr(i, j);
    return s;
  };
  std::vector<double> norms(static_cast<std::size_t>(n)), reference(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) norms[static_cast<std::size_t>(j)] = reference[static_cast<std::size_t>(j)] = trailing_norm2(j, 0);
  for (Index k = 0; k < std::min(m, n); ++k) {
    // Pick the remaining column with the largest norm; ties go to the smallest index.
    Index best = k;
    double best_norm = -1.0;
    for (Index j = k; j < n; ++j) {
      const double s = norms[static_cast<std::size_t>(j)];
      if (s > best_norm) {
        best_norm = s;
        best = j;
      }
    }
    best_norm = std::sqrt(trailing_norm2(best, k));
    if (k == 0) first_pivot = best_norm;
    if (best_norm == 0.0 || best_norm <= drop_tol * first_pivot) break;
    if (best != k) {
      for (Index i = 0; i < m; ++i) std::swap(qr(i, k), qr(i, best));
      std::swap(f.perm[static_cast<std::size_t>(k)], f.perm[static_cast<std::size_t>(best)]);
      std::swap(norms[static_cast<std::size_t>(k)], norms[static_cast<std::size_t>(best)]);
      std::swap(reference[static_cast<std::size_t>(k)], reference[static_cast<std::size_t>(best)]);
    }
    const double x0 = qr(k, k);
    const double alpha = x0 >= 0.0 ? -best_norm : best_norm;
    const double v0 = x0 - alpha;
    // v = (x − alpha·e1) / v0 so that v(k) = 1.
    double vnorm2 = 1.0;
    for (Index i = k + 1; i < m; ++i) {
      qr(i, k) /= v0;
      vnorm2 += qr(i, k) * qr(i, k);
    }
    f.beta[k] = 2.0 / vnorm2;
    qr(k, k) = alpha;
    for (Index j = k + 1; j < n; ++j) {
      double s = qr(k, j);
      for (Index i = k + 1; i < m; ++i) s += qr(i, k) * qr(i, j);
      s *= f.beta[k];
      qr(k, j) -= s;
      for (Index i = k + 1; i < m; ++i) qr(i, j) -= s * qr(i, k);
      const std::size_t ju = static_cast<std::size_t>(j);
      norms[ju] -= qr(k, j) * qr(k, j);
      if (norms[ju] <= 1e-8 * reference[ju]) norms[ju] = reference[ju] = trailing_norm2(j, k + 1);
    }
    f.rank = k + 1;
  }
  return f;
}

/// Minimizer of ‖b − A·x‖₂ with the smallest norm among all minimizers (up to the rank
/// decision of the pivoted QR).
inline Vec qr_least_squares(const Mat& a, const Vec& b, double drop_tol = 1e-12) {
  if (b.size() != a.rows()) throw SolverError(ErrorCode::DimensionMismatch, "qr_least_squares");
  const Index n = a.cols();
  Vec x(n);
  if (n == 0 || a.rows() == 0) return x;
  const QrDecomposition f = pivoted_qr(a, drop_tol);
  const Index r = f.rank;
  if (r == 0) return x;
  Vec c = b;
  f.apply_qt(c);

  auto back_substitute = [&](Vec rhs) {
    for (Index i = r - 1; i >= 0; --i) {
      double s = rhs[i];
      for (Index j = i + 1; j < r; ++j) s -= f.qr(i, j) * rhs[j];
      rhs[i] = s / f.qr(i, i);
    }
    return rhs;
  };

  Vec xp(n);
  Vec x0 = back_substitute(c.segment(0, r));
  if (r == n) {
    xp = x0;
  } else {
    // x = [x0 − T·y; y] with T = R11⁻¹R12; choose y minimizing ‖x‖.
    const Index k = n - r;
    Mat t(r, k);
    for (Index j = 0; j < k; ++j) {
      Vec col(r);
      for (Index i = 0; i < r; ++i) col[i] = f.qr(i, r + j);
      t.set_col(j, back_substitute(col));
    }
    Mat normal = tmul(t, t);
    for (Index i = 0; i < k; ++i) normal(i, i) += 1.0;
    const Vec y = cholesky_solve(cholesky(symmetrize(normal)), tmul(t, x0));
    Vec top = x0 - t * y;
    xp.set_segment(0, top);
    xp.set_segment(r, y);
  }
  for (Index j = 0; j < n; ++j) x[f.perm[static_cast<std::size_t>(j)]] = xp[j];
  return x;
}

/// Orthonormal basis of the nullspace of Aᵀ (columns orthogonal to every column of A).
inline Mat nullspace_of_transpose(const Mat& a, Index* rank_out = nullptr, double drop_tol = 1e-12) {
  const Index m = a.rows();
  if (a.cols() == 0) {
    if (rank_out) *rank_out = 0;
    return Mat::identity(m);
  }
  const QrDecomposition f = pivoted_qr(a, drop_tol);
  if (rank_out) *rank_out = f.rank;
  const Mat q = f.q();
  return q.block(0, f.rank, m, m - f.rank);
}

// ---------------------------------------------------------------------------------------------
// LU with partial pivoting (general square solves, used by tests and small dense systems)

inline Vec lu_solve(Mat a, Vec b) {
  const Index n = a.rows();
  if (a.cols() != n || b.size() != n) throw SolverError(ErrorCode::DimensionMismatch, "lu_solve");
  for (Index k = 0; k < n; ++k) {
    Index p = k;
    for (Index i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (a(p, k) == 0.0) throw SolverError(ErrorCode::NotPositiveDefinite, "lu_solve: singular matrix");
    if (p != k) {
      for (Index j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      std::swap(b[k], b[p]);
    }
    for (Index i = k + 1; i < n; ++i) {
      const double l = a(i, k) / a(k, k);
      if (l == 0.0) continue;
      for (Index j = k + 1; j < n; ++j) a(i, j) -= l * a(k, j);
      b[i] -= l * b[k];
    }
  }
  for (Index i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (Index j = i + 1; j < n; ++j) s -= a(i, j) * b[j];
    b[i] = s / a(i, i);
  }
  return b;
}

// ---------------------------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi)

struct SymEig {
  Vec values;    // ascending
  Mat vectors;   // column i belongs to values[i]
};

inline SymEig sym_eig(const Mat& m, double sym_tol = 1e-10) {
  if (m.rows() != m.cols()) throw SolverError(ErrorCode::DimensionMismatch, "sym_eig: non-square");
  if (!is_symmetric(m, sym_tol)) throw SolverError(ErrorCode::NotSymmetric, "sym_eig");
  const Index n = m.rows();
  Mat a = symmetrize(m);
  Mat v = Mat::identity(n);
  const double total = std::max(norm_fro(a), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = j + 1; i < n; ++i) off += a(i, j) * a(i, j);
    if (std::sqrt(off) <= 1e-17 * total) break;
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return a(i, i) < a(j, j); });
  SymEig out{Vec(n), Mat(n, n)};
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.values[k] = a(src, src);
    for (Index i = 0; i < n; ++i) out.vectors(i, k) = v(i, src);
  }
  return out;
}

/// V·diag(f(λ))·Vᵀ for a symmetric eigendecomposition.
template <class F>
Mat spectral_map(const SymEig& e, F&& f) {
  const Index n = e.values.size();
  Mat out(n, n);
  for (Index k = 0; k < n; ++k) {
    const double fk = f(e.values[k]);
    for (Index j = 0; j < n; ++j) {
      const double vj = e.vectors(j, k) * fk;
      for (Index i = 0; i < n; ++i) out(i, j) += e.vectors(i, k) * vj;
    }
  }
  return symmetrize(out);
}

inline double min_eigenvalue(const Mat& m) {
  if (m.rows() == 0) return std::numeric_limits<double>::infinity();
  return sym_eig(m).values[0];
}

// ---------------------------------------------------------------------------------------------
// General (nonsymmetric) eigenvalues: balancing, Householder Hessenberg reduction, Francis
// double-shift QR.

namespace detail {

inline void balance(Mat& a) {
  const Index n = a.rows();
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (Index i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(a(j, i));
        r += std::abs(a(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (Index j = 0; j < n; ++j) a(i, j) *= g;
        for (Index j = 0; j < n; ++j) a(j, i) *= f;
      }
    }
  }
}

inline void hessenberg(Mat& a) {
  const Index n = a.rows();
  std::vector<double> v(static_cast<std::size_t>(n));
  for (Index k = 0; k + 2 < n; ++k) {
    double norm = 0.0;
    for (Index i = k + 1; i < n; ++i) norm += a(i, k) * a(i, k);
    norm = std::sqrt(norm);
    if (norm == 0.0) continue;
    const double x0 = a(k + 1, k);
    const double alpha = x0 >= 0.0 ? -norm : norm;
    double vnorm2 = 0.0;
    for (Index i = k + 1; i < n; ++i) {
      v[static_cast<std::size_t>(i)] = a(i, k);
      if (i == k + 1) v[static_cast<std::size_t>(i)] -= alpha;
      vnorm2 += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    }
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;
    for (Index j = 0; j < n; ++j) {
      double s = 0.0;
      for (Index i = k + 1; i < n; ++i) s += v[static_cast<std::size_t>(i)] * a(i, j);
      s *= beta;
      for (Index i = k + 1; i < n; ++i) a(i, j) -= s * v[static_cast<std::size_t>(i)];
    }
    for (Index i = 0; i < n; ++i) {
      double s = 0.0;
      for (Index j = k + 1; j < n; ++j) s += a(i, j) * v[static_cast<std::size_t>(j)];
      s *= beta;
      for (Index j = k + 1; j < n; ++j) a(i, j) -= s * v[static_cast<std::size_t>(j)];
    }
    for (Index i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }
}

inline double sign_of(double a, double b) { return b >= 0.0 ? std::abs(a) : -std::abs(a); }

// Eigenvalues of an upper Hessenberg matrix (destroys a).
inline std::vector<std::complex<double>> hessenberg_qr(Mat& a, int max_iter) {
  const Index n = a.rows();
  std::vector<std::complex<double>> w(static_cast<std::size_t>(n));
  const double eps = std::numeric_limits<double>::epsilon();
  double anorm = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = std::max<Index>(i - 1, 0); j < n; ++j) anorm += std::abs(a(i, j));
  Index nn = n - 1;
  double t = 0.0;
  int total = 0;
  double p = 0, q = 0, r = 0, s = 0, x = 0, y = 0, z = 0, u = 0, v = 0, ww = 0;
  while (nn >= 0) {
    int its = 0;
    Index l = 0;
    do {
      for (l = nn; l > 0; --l) {
        s = std::abs(a(l - 1, l - 1)) + std::abs(a(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(a(l, l - 1)) <= eps * s) {
          a(l, l - 1) = 0.0;
          break;
        }
      }
      x = a(nn, nn);
      if (l == nn) {
        w[static_cast<std::size_t>(nn)] = x + t;
        --nn;
      } else {
        y = a(nn - 1, nn - 1);
        ww = a(nn, nn - 1) * a(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + ww;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + sign_of(z, p);
            w[static_cast<std::size_t>(nn - 1)] = w[static_cast<std::size_t>(nn)] = x + z;
            if (z != 0.0) w[static_cast<std::size_t>(nn)] = x - ww / z;
          } else {
            w[static_cast<std::size_t>(nn)] = {x + p, -z};
            w[static_cast<std::size_t>(nn - 1)] = {x + p, z};
          }
          nn -= 2;
        } else {
          if (++total > max_iter) throw SolverError(ErrorCode::NoConvergence, "eigenvalue QR iteration cap");
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift.
            t += x;
            for (Index i = 0; i <= nn; ++i) a(i, i) -= x;
            s = std::abs(a(nn, nn - 1)) + std::abs(a(nn - 1, nn - 2));
            y = x = 0.75 * s;
            ww = -0.4375 * s * s;
          }
          ++its;
          Index m = nn - 2;
          for (; m >= l; --m) {
            z = a(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - ww) / a(m + 1, m) + a(m, m + 1);
            q = a(m + 1, m + 1) - z - r - s;
            r = a(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            u = std::abs(a(m, m - 1)) * (std::abs(q) + std::abs(r));
            v = std::abs(p) * (std::abs(a(m - 1, m - 1)) + std::abs(z) + std::abs(a(m + 1, m + 1)));
            if (u <= eps * v) break;
          }
          for (Index i = m; i < nn - 1; ++i) {
            a(i + 2, i) = 0.0;
            if (i != m) a(i + 2, i - 1) = 0.0;
          }
          for (Index k = m; k < nn; ++k) {
            if (k != m) {
              p = a(k, k - 1);
              q = a(k + 1, k - 1);
              r = 0.0;
              if (k + 1 != nn) r = a(k + 2, k - 1);
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = sign_of(std::sqrt(p * p + q * q + r * r), p)) != 0.0) {
              if (k == m) {
                if (l != m) a(k, k - 1) = -a(k, k - 1);
              } else {
                a(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (Index j = k; j <= nn; ++j) {
                p = a(k, j) + q * a(k + 1, j);
                if (k + 1 != nn) {
                  p += r * a(k + 2, j);
                  a(k + 2, j) -= p * z;
                }
                a(k + 1, j) -= p * y;
                a(k, j) -= p * x;
              }
              const Index mmin = nn < k + 3 ? nn : k + 3;
              for (Index i = l; i <= mmin; ++i) {
                p = x * a(i, k) + y * a(i, k + 1);
                if (k + 1 != nn) {
                  p += z * a(i, k + 2);
                  a(i, k + 2) -= p * r;
                }
                a(i, k + 1) -= p * q;
                a(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  return w;
}

}  // namespace detail

/// All eigenvalues of a general square matrix.
inline std::vector<std::complex<double>> eigenvalues(const Mat& m, int max_iter = 10000) {
  if (m.rows() != m.cols()) throw SolverError(ErrorCode::DimensionMismatch, "eigenvalues: non-square");
  if (!m.all_finite()) throw SolverError(ErrorCode::NoConvergence, "eigenvalues: non-finite input");
  Mat a = m;
  detail::balance(a);
  detail::hessenberg(a);
  return detail::hessenberg_qr(a, max_iter);
}

/// Largest eigenvalue modulus of a general square matrix.
inline double spectral_radius(const Mat& m, int max_iter = 10000) {
  double rho = 0.0;
  for (const auto& lambda : eigenvalues(m, max_iter)) rho = std::max(rho, std::abs(lambda));
  return rho;
}

}  // namespace aasqp
