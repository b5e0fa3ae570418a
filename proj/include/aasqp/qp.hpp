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

// Dense primal active-set solver for strictly convex QPs
//
//     minimize    ½·dᵀ·W·d + qᵀ·d
//     subject to  g0 + Gᵀ·d  = 0
//                 h0 + Hᵀ·d <= 0
//
// with one column of G (H) per equality (inequality). W only needs to be positive definite on the
// nullspace of every working set, which covers Gauss-Newton type Hessians that vanish on
// variables fixed by the equalities.
//
// Feasibility of the starting point is obtained with a single elastic variable t >= 0 that
// relaxes every inequality, h0 + Hᵀ·d <= t, and is priced by an exact penalty M·t + ½·t². The
// penalty is escalated until t vanishes; if it never does the QP is reported infeasible. Every
// working-set subproblem is solved from scratch by the nullspace method, so rounding errors do
// not accumulate across active-set changes.

#pragma once

#include <algorithm>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "aasqp/errors.hpp"
#include "aasqp/linalg.hpp"

namespace aasqp {

struct QpData {
  Mat W;   // n_v × n_v, symmetric
  Vec q;   // n_v
  Mat G;   // n_v × n_g
  Vec g0;  // n_g
  Mat H;   // n_v × n_h
  Vec h0;  // n_h

  Index n_v() const { return q.size(); }
  Index n_g() const { return g0.size(); }
  Index n_h() const { return h0.size(); }

  void validate() const {
    auto fail = [](const char* what) { throw SolverError(ErrorCode::DimensionMismatch, std::string("QpData: ") + what); };
    const Index n = n_v();
    if (W.rows() != n || W.cols() != n) fail("W");
    if (n_g() > 0 && (G.rows() != n || G.cols() != n_g())) fail("G");
    if (n_h() > 0 && (H.rows() != n || H.cols() != n_h())) fail("H");
    if (!is_symmetric(W, 1e-10)) throw SolverError(ErrorCode::NotSymmetric, "QpData: W not symmetric");
  }
};

struct QpSolution {
  Vec d;
  Vec lambda;
  Vec mu;
  std::vector<Index> active_set;  // sorted inequality indices treated as equalities
  int iterations = 0;
};

struct QpKktError {
  double stationarity = 0.0;     // ‖W·d + q + G·λ + H·µ‖∞
  double equality = 0.0;         // ‖g0 + Gᵀ·d‖∞
  double inequality = 0.0;       // max(0, max_i (h0 + Hᵀ·d)_i)
  double dual = 0.0;             // max(0, −min µ)
  double complementarity = 0.0;  // max_i |µ_i·(h0 + Hᵀ·d)_i|
};

inline QpKktError qp_kkt_error(const QpData& qp, const QpSolution& s) {
  QpKktError e;
  Vec stat = qp.W * s.d + qp.q;
  if (qp.n_g() > 0) stat += qp.G * s.lambda;
  if (qp.n_h() > 0) stat += qp.H * s.mu;
  e.stationarity = norm_inf(stat);
  if (qp.n_g() > 0) e.equality = norm_inf(qp.g0 + tmul(qp.G, s.d));
  if (qp.n_h() > 0) {
    const Vec slack = qp.h0 + tmul(qp.H, s.d);
    for (Index i = 0; i < qp.n_h(); ++i) {
      e.inequality = std::max(e.inequality, slack[i]);
      e.dual = std::max(e.dual, -s.mu[i]);
      e.complementarity = std::max(e.complementarity, std::abs(s.mu[i] * slack[i]));
    }
  }
  return e;
}

namespace detail {

struct SaddleSolution {
  Vec x;
  Vec nu;
};

/// Solves  B·x + c + A·ν = 0,  Aᵀ·x = b  by the nullspace method. Throws
/// RankDeficientConstraints when A loses column rank and NotPositiveDefinite when the reduced
/// Hessian is not positive definite.
inline SaddleSolution solve_saddle(const Mat& b_mat, const Vec& c, const Mat& a, const Vec& b) {
  const Index n = c.size();
  const Index m = b.size();
  SaddleSolution out;
  if (m == 0) {
    const Mat l = cholesky(symmetrize(b_mat));
    out.x = cholesky_solve(l, -c);
    return out;
  }
  const QrDecomposition f = pivoted_qr(a);
  if (f.rank < m) throw SolverError(ErrorCode::RankDeficientConstraints, "working set is rank deficient");
  // Rᵀ·y = Pᵀ·b, x_p = Q1·y
  Vec xp(n);
  for (Index i = 0; i < m; ++i) {
    double s = b[f.perm[static_cast<std::size_t>(i)]];
    for (Index k = 0; k < i; ++k) s -= f.qr(k, i) * xp[k];
    xp[i] = s / f.qr(i, i);
  }
  f.apply_q(xp);
  Vec x = xp;
  if (m < n) {
    // Only the nullspace basis Z = Q·[0; I] is formed explicitly.
    Mat z(n, n - m);
    for (Index j = 0; j < n - m; ++j) {
      Vec e(n);
      e[m + j] = 1.0;
      f.apply_q(e);
      z.set_col(j, e);
    }
    const Mat reduced = symmetrize(congruence(z, b_mat));
    const Mat l = cholesky(reduced);
    const Vec yz = cholesky_solve(l, -tmul(z, b_mat * xp + c));
    x += z * yz;
  }
  // A·ν = −(B·x + c):  R·Pᵀ·ν = −Q1ᵀ·(B·x + c)
  Vec rhs = b_mat * x + c;
  f.apply_qt(rhs);
  for (Index k = 0; k < m; ++k) rhs[k] = -rhs[k];
  Vec w(m);
  for (Index i = m - 1; i >= 0; --i) {
    double s = rhs[i];
    for (Index k = i + 1; k < m; ++k) s -= f.qr(i, k) * w[k];
    w[i] = s / f.qr(i, i);
  }
  out.nu = Vec(m);
  for (Index i = 0; i < m; ++i) out.nu[f.perm[static_cast<std::size_t>(i)]] = w[i];
  out.x = std::move(x);
  return out;
}

}  // namespace detail

/// Equality-constrained QP: minimize ½dᵀWd + qᵀd s.t. g0 + Gᵀd = 0. Returns (d, λ).
inline std::pair<Vec, Vec> solve_eq_qp(const Mat& w, const Vec& q, const Mat& g, const Vec& g0) {
  const Index n = q.size();
  if (w.rows() != n || w.cols() != n || (g0.size() > 0 && (g.rows() != n || g.cols() != g0.size())))
    throw SolverError(ErrorCode::DimensionMismatch, "solve_eq_qp");
  detail::SaddleSolution s = detail::solve_saddle(w, q, g0.size() > 0 ? g : Mat(n, 0), -g0);
  if (s.nu.size() != g0.size()) s.nu = Vec(g0.size());
  return {std::move(s.x), std::move(s.nu)};
}

/// Primal active-set QP solve. `warm_start` is a candidate active set (for example the final
/// active set of a previous, similar QP); it is used when the corresponding equality-constrained
/// solution is primal feasible and ignored otherwise.
inline QpSolution solve_qp(const QpData& qp, const std::vector<Index>* warm_start = nullptr, double tol = 1e-10) {
  qp.validate();
  const Index n = qp.n_v();
  const Index ng = qp.n_g();
  const Index nh = qp.n_h();
  const Index nx = n + 1;          // (d, t)
  const Index elastic = nh;        // inequality index of −t <= 0
  const double q_scale = 1.0 + norm_inf(qp.q);

  // Starting point from the equalities alone.
  Vec d0(n);
  if (ng > 0) {
    const QrDecomposition fg = pivoted_qr(qp.G);
    Vec gt_sol(n);
    if (fg.rank == ng) {
      // Minimum-norm solution of Gᵀ·d = −g0 from the same factorization.
      for (Index i = 0; i < ng; ++i) {
        double s = -qp.g0[fg.perm[static_cast<std::size_t>(i)]];
        for (Index k = 0; k < i; ++k) s -= fg.qr(k, i) * gt_sol[k];
        gt_sol[i] = s / fg.qr(i, i);
      }
      fg.apply_q(gt_sol);
    } else {
      gt_sol = qr_least_squares(qp.G.transpose(), -qp.g0);
    }
    const double residual = norm_inf(tmul(qp.G, gt_sol) + qp.g0);
    if (residual > 1e-8 * (1.0 + norm_inf(qp.g0)))
      throw SolverError(ErrorCode::Infeasible, "linearized equality constraints are inconsistent");
    if (fg.rank < ng) throw SolverError(ErrorCode::RankDeficientConstraints, "equality Jacobian is rank deficient");
    d0 = gt_sol;
  }

  // Extended problem data.
  Mat b_mat(nx, nx);
  b_mat.set_block(0, 0, qp.W);
  b_mat(n, n) = 1.0;
  double penalty = 1e6 * q_scale;
  auto linear_term = [&] {
    Vec c(nx);
    c.set_segment(0, qp.q);
    c[n] = penalty;
    return c;
  };
  // Column for constraint id: equalities are 0..ng−1, inequalities ng..ng+nh (last is elastic).
  auto column = [&](Index id) {
    Vec a(nx);
    if (id < ng) {
      for (Index i = 0; i < n; ++i) a[i] = qp.G(i, id);
    } else if (id - ng < nh) {
      const Index j = id - ng;
      for (Index i = 0; i < n; ++i) a[i] = qp.H(i, j);
      a[n] = -1.0;
    } else {
      a[n] = -1.0;
    }
    return a;
  };
  auto rhs = [&](Index id) {
    if (id < ng) return -qp.g0[id];
    if (id - ng < nh) return -qp.h0[id - ng];
    return 0.0;
  };
  auto solve_working_set = [&](const std::vector<Index>& ws) {
    Mat a(nx, static_cast<Index>(ws.size()));
    Vec b(static_cast<Index>(ws.size()));
    for (std::size_t k = 0; k < ws.size(); ++k) {
      a.set_col(static_cast<Index>(k), column(ws[k]));
      b[static_cast<Index>(k)] = rhs(ws[k]);
    }
    return detail::solve_saddle(b_mat, linear_term(), a, b);
  };

  std::vector<Index> working;
  for (Index j = 0; j < ng; ++j) working.push_back(j);
  std::vector<char> in_working(static_cast<std::size_t>(nh + 1), 0);
  Vec x(nx);
  bool started = false;

  if (warm_start) {
    std::vector<Index> ws = working;
    std::vector<Index> sorted = *warm_start;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    bool valid = true;
    for (Index i : sorted) valid = valid && i >= 0 && i < nh;
    if (valid) {
      for (Index i : sorted) ws.push_back(ng + i);
      ws.push_back(ng + elastic);
      try {
        const detail::SaddleSolution s = solve_working_set(ws);
        const Vec slack = qp.h0 + tmul(qp.H, s.x.segment(0, n));
        bool feasible = true;
        for (Index i = 0; i < nh; ++i) feasible = feasible && slack[i] <= 1e-9 * (1.0 + std::abs(qp.h0[i]));
        if (feasible) {
          x = s.x;
          x[n] = 0.0;
          working = ws;
          for (Index i : sorted) in_working[static_cast<std::size_t>(i)] = 1;
          in_working[static_cast<std::size_t>(elastic)] = 1;
          started = true;
        }
      } catch (const SolverError&) {
        // fall back to a cold start
      }
    }
  }
  if (!started) {
    x.set_segment(0, d0);
    double viol = 0.0;
    if (nh > 0) {
      const Vec slack = qp.h0 + tmul(qp.H, d0);
      for (Index i = 0; i < nh; ++i) viol = std::max(viol, slack[i]);
    }
    x[n] = viol;
    if (viol == 0.0) {
      working.push_back(ng + elastic);
      in_working[static_cast<std::size_t>(elastic)] = 1;
    }
  }

  std::vector<Vec> columns;
  columns.reserve(static_cast<std::size_t>(nh + 1));
  for (Index i = 0; i <= nh; ++i) columns.push_back(column(ng + i));

  const int max_iter = static_cast<int>(50 * (n + nh) + 50);
  QpSolution sol;
  Vec nu;
  int iter = 0;
  for (;;) {
    if (++iter > max_iter) throw SolverError(ErrorCode::Degenerate, "active-set iteration cap reached");
    const detail::SaddleSolution s = solve_working_set(working);
    const Vec p = s.x - x;
    if (norm_inf(p) <= 1e-12 * (1.0 + norm_inf(x))) {
      x = s.x;
      nu = s.nu;
      // Most negative inequality multiplier (elastic excluded from the scale), ties to the
      // smallest index.
      double scale = 1.0;
      for (std::size_t k = 0; k < working.size(); ++k)
        if (working[k] != ng + elastic) scale = std::max(scale, std::abs(nu[static_cast<Index>(k)]));
      Index drop = -1;
      double most_negative = -1e-2 * tol * scale;
      Index drop_id = std::numeric_limits<Index>::max();
      for (std::size_t k = static_cast<std::size_t>(ng); k < working.size(); ++k) {
        const double value = nu[static_cast<Index>(k)];
        if (value < most_negative || (value == most_negative && drop >= 0 && working[k] < drop_id)) {
          most_negative = value;
          drop = static_cast<Index>(k);
          drop_id = working[k];
        }
      }
      if (drop < 0) {
        if (x[n] > 1e-9 * (1.0 + norm_inf(qp.h0))) {
          penalty *= 100.0;
          if (penalty > 1e16 * q_scale) throw SolverError(ErrorCode::Infeasible, "QP constraints are inconsistent");
          continue;
        }
        break;
      }
      in_working[static_cast<std::size_t>(working[static_cast<std::size_t>(drop)] - ng)] = 0;
      working.erase(working.begin() + drop);
      continue;
    }
    // Ratio test; strict comparison keeps the smallest blocking index on ties.
    double alpha = 1.0;
    Index blocking = -1;
    const double pnorm = norm_inf(p);
    for (Index i = 0; i <= nh; ++i) {
      if (in_working[static_cast<std::size_t>(i)]) continue;
      const Vec& a = columns[static_cast<std::size_t>(i)];
      const double ap = dot(a, p);
      if (ap <= 1e-14 * (1.0 + norm_inf(a)) * pnorm) continue;
      const double slack = std::max(0.0, rhs(ng + i) - dot(a, x));
      const double step = slack / ap;
      if (step < alpha) {
        alpha = step;
        blocking = i;
      }
    }
    axpy(alpha, p, x);
    if (blocking >= 0) {
      working.push_back(ng + blocking);
      in_working[static_cast<std::size_t>(blocking)] = 1;
    }
  }

  // Re-solve the final working set without the elastic variable so the large penalty does not
  // leak rounding error into d and the multipliers.
  {
    std::vector<Index> final_ws;
    for (Index id : working)
      if (id != ng + elastic) final_ws.push_back(id);
    Mat a(n, static_cast<Index>(final_ws.size()));
    Vec b(static_cast<Index>(final_ws.size()));
    for (std::size_t k = 0; k < final_ws.size(); ++k) {
      a.set_col(static_cast<Index>(k), column(final_ws[k]).segment(0, n));
      b[static_cast<Index>(k)] = rhs(final_ws[k]);
    }
    try {
      const detail::SaddleSolution s = detail::solve_saddle(qp.W, qp.q, a, b);
      working = final_ws;
      x.set_segment(0, s.x);
      nu = s.nu;
    } catch (const SolverError&) {
      // keep the elastic solution
    }
  }

  sol.iterations = iter;
  sol.d = x.segment(0, n);
  sol.lambda = Vec(ng);
  sol.mu = Vec(nh);
  for (std::size_t k = 0; k < working.size(); ++k) {
    const Index id = working[k];
    const double value = nu[static_cast<Index>(k)];
    if (id < ng) {
      sol.lambda[id] = value;
    } else if (id - ng < nh) {
      sol.mu[id - ng] = value;
      sol.active_set.push_back(id - ng);
    }
  }
  std::sort(sol.active_set.begin(), sol.active_set.end());
  return sol;
}

// ---------------------------------------------------------------------------------------------
// Plain-text dump
//
// One block per field in the order W q G g0 H h0. Each block starts with a header line
// "<name> <rows> <cols>" followed by `rows` lines of `cols` space-separated values printed with 17
// significant digits. Vectors are written as column matrices.

inline void write_qp(const QpData& qp, std::ostream& os) {
  auto put = [&](const char* name, const Mat& m) {
    os << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
    os << std::setprecision(17);
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
      os << '\n';
    }
  };
  auto as_col = [](const Vec& v) {
    Mat m(v.size(), 1);
    m.set_col(0, v);
    return m;
  };
  os << "# aasqp QP dump\n";
  put("W", qp.W);
  put("q", as_col(qp.q));
  put("G", qp.G.rows() == 0 ? Mat(qp.n_v(), 0) : qp.G);
  put("g0", as_col(qp.g0));
  put("H", qp.H.rows() == 0 ? Mat(qp.n_v(), 0) : qp.H);
  put("h0", as_col(qp.h0));
}

inline QpData read_qp(std::istream& is) {
  auto get = [&](const char* expected) {
    std::string name;
    Index r = 0, c = 0;
    while (is.peek() == '#') {
      std::string skip;
      std::getline(is, skip);
    }
    if (!(is >> name >> r >> c) || name != expected)
      throw SolverError(ErrorCode::DimensionMismatch, std::string("read_qp: expected block ") + expected);
    Mat m(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) is >> m(i, j);
    is >> std::ws;
    return m;
  };
  QpData qp;
  qp.W = get("W");
  qp.q = get("q").col(0);
  qp.G = get("G");
  const Mat g0 = get("g0");
  qp.g0 = g0.cols() ? g0.col(0) : Vec();
  qp.H = get("H");
  const Mat h0 = get("h0");
  qp.h0 = h0.cols() ? h0.col(0) : Vec();
  return qp;
}

}  // namespace aasqp
