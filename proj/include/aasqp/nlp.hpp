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

// Nonlinear program
//
//     minimize f(v)  subject to  g(v) = 0,  h(v) <= 0
//
// described by callbacks, together with the primal-dual iterate type, finite-difference derivative
// checking and the slack reformulation of L1 penalty terms.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aasqp/errors.hpp"
#include "aasqp/linalg.hpp"

namespace aasqp {

/// A convex-over-nonlinear term φ(F(v)). `inner` evaluates F and its Jacobian ∂F/∂v; `outer_hessian`
/// returns ∇²φ at y = F(v), which must be positive semidefinite.
struct ConvexTerm {
  std::function<void(const Vec& v, Vec& value, Mat& jacobian)> inner;
  std::function<Mat(const Vec& y)> outer_hessian;
  Index constraint_index = -1;  // row of h for constraint terms, −1 for objective terms
};

/// Outer convexity metadata consumed by the GGN and SCQP Hessians.
struct OuterStructure {
  std::vector<ConvexTerm> objective;    // f = Σ φ_i(F_i(v)) (up to terms with zero curvature)
  std::vector<ConvexTerm> constraints;  // h_i = φ_i(F_i(v)) for the listed rows
};

struct Nlp {
  Index n_v = 0;
  Index n_g = 0;
  Index n_h = 0;

  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad_f;
  std::function<Vec(const Vec&)> g;
  std::function<Mat(const Vec&)> jac_g;  // n_g × n_v
  std::function<Vec(const Vec&)> h;
  std::function<Mat(const Vec&)> jac_h;  // n_h × n_v
  /// ∇²_v (f + λᵀg + µᵀh), symmetric.
  std::function<Mat(const Vec& v, const Vec& lambda, const Vec& mu)> hess_lagrangian;

  std::optional<OuterStructure> outer;
};

/// Primal-dual point z = (v, λ, µ).
struct PrimalDualIterate {
  Vec v;
  Vec lambda;
  Vec mu;

  static PrimalDualIterate zeros(const Nlp& nlp) {
    return {Vec(nlp.n_v), Vec(nlp.n_g), Vec(nlp.n_h)};
  }

  Index size() const { return v.size() + lambda.size() + mu.size(); }

  Vec pack() const { return concat({&v, &lambda, &mu}); }

  static PrimalDualIterate unpack(const Nlp& nlp, const Vec& z) {
    if (z.size() != nlp.n_v + nlp.n_g + nlp.n_h)
      throw SolverError(ErrorCode::DimensionMismatch, "primal-dual vector has wrong length");
    return {z.segment(0, nlp.n_v), z.segment(nlp.n_v, nlp.n_g), z.segment(nlp.n_v + nlp.n_g, nlp.n_h)};
  }
};

inline double lagrangian(const Nlp& nlp, const PrimalDualIterate& z) {
  return nlp.f(z.v) + dot(z.lambda, nlp.g(z.v)) + dot(z.mu, nlp.h(z.v));
}

inline Vec lagrangian_gradient(const Nlp& nlp, const Vec& v, const Vec& lambda, const Vec& mu) {
  Vec grad = nlp.grad_f(v);
  if (nlp.n_g > 0) grad += tmul(nlp.jac_g(v), lambda);
  if (nlp.n_h > 0) grad += tmul(nlp.jac_h(v), mu);
  return grad;
}

/// Checks callback output sizes at v; throws DimensionMismatch on the first inconsistency.
inline void validate_dimensions(const Nlp& nlp, const Vec& v) {
  auto fail = [](const std::string& what) { throw SolverError(ErrorCode::DimensionMismatch, what); };
  if (v.size() != nlp.n_v) fail("v has wrong length");
  if (nlp.grad_f(v).size() != nlp.n_v) fail("grad_f");
  if (nlp.g(v).size() != nlp.n_g) fail("g");
  if (nlp.h(v).size() != nlp.n_h) fail("h");
  const Mat jg = nlp.jac_g(v);
  if (jg.rows() != nlp.n_g || jg.cols() != nlp.n_v) fail("jac_g");
  const Mat jh = nlp.jac_h(v);
  if (jh.rows() != nlp.n_h || jh.cols() != nlp.n_v) fail("jac_h");
  const Mat hl = nlp.hess_lagrangian(v, Vec(nlp.n_g), Vec(nlp.n_h));
  if (hl.rows() != nlp.n_v || hl.cols() != nlp.n_v) fail("hess_lagrangian");
}

// ---------------------------------------------------------------------------------------------
// Finite-difference derivative check

struct DerivativeReport {
  double grad_f = 0.0;
  double jac_g = 0.0;
  double jac_h = 0.0;
  double hess_lagrangian = 0.0;

  double worst() const { return std::max(std::max(grad_f, jac_g), std::max(jac_h, hess_lagrangian)); }
};

namespace detail {

inline double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(numeric));
}

/// Central-difference Jacobian of a vector function, one column per coordinate of v.
inline Mat fd_jacobian(const std::function<Vec(const Vec&)>& fn, const Vec& v, Index rows, double step) {
  Mat j(rows, v.size());
  Vec vp = v;
  for (Index c = 0; c < v.size(); ++c) {
    vp[c] = v[c] + step;
    const Vec fp = fn(vp);
    vp[c] = v[c] - step;
    const Vec fm = fn(vp);
    vp[c] = v[c];
    for (Index r = 0; r < rows; ++r) j(r, c) = (fp[r] - fm[r]) / (2.0 * step);
  }
  return j;
}

}  // namespace detail

/// Compares every derivative callback against central differences of the callback one level
/// below it. The Lagrangian Hessian is checked against differences of the Lagrangian gradient
/// at the supplied multipliers (zero when omitted).
inline DerivativeReport check_derivatives(const Nlp& nlp, const Vec& v, double h_fd,
                                          std::optional<Vec> lambda = std::nullopt,
                                          std::optional<Vec> mu = std::nullopt) {
  if (!(h_fd > 0.0)) throw SolverError(ErrorCode::Configuration, "check_derivatives: h_fd must be positive");
  const Vec lam = lambda.value_or(Vec(nlp.n_g));
  const Vec m = mu.value_or(Vec(nlp.n_h));
  DerivativeReport rep;

  const Vec grad = nlp.grad_f(v);
  const Mat grad_fd = detail::fd_jacobian([&](const Vec& x) { return Vec{nlp.f(x)}; }, v, 1, h_fd);
  for (Index i = 0; i < nlp.n_v; ++i) rep.grad_f = std::max(rep.grad_f, detail::rel_err(grad[i], grad_fd(0, i)));

  auto compare = [](const Mat& a, const Mat& b) {
    double worst = 0.0;
    for (Index j = 0; j < a.cols(); ++j)
      for (Index i = 0; i < a.rows(); ++i) worst = std::max(worst, detail::rel_err(a(i, j), b(i, j)));
    return worst;
  };
  if (nlp.n_g > 0) rep.jac_g = compare(nlp.jac_g(v), detail::fd_jacobian(nlp.g, v, nlp.n_g, h_fd));
  if (nlp.n_h > 0) rep.jac_h = compare(nlp.jac_h(v), detail::fd_jacobian(nlp.h, v, nlp.n_h, h_fd));
  const Mat hess_fd = detail::fd_jacobian(
      [&](const Vec& x) { return lagrangian_gradient(nlp, x, lam, m); }, v, nlp.n_v, h_fd);
  rep.hess_lagrangian = compare(nlp.hess_lagrangian(v, lam, m), hess_fd);
  return rep;
}

// ---------------------------------------------------------------------------------------------
// L1 penalty reformulation

/// weight·|aᵀv + b|
struct L1Term {
  double weight = 1.0;
  Vec coefficients;
  double offset = 0.0;
};

/// Replaces Σ w_i·|a_iᵀv + b_i| by slacks: variables become (v, s⁺_1, s⁻_1, …), the objective gains
/// Σ w_i·(s⁺_i + s⁻_i), equalities gain a_iᵀv + b_i − (s⁺_i − s⁻_i) = 0 and inequalities gain
/// −s⁺_i ≤ 0, −s⁻_i ≤ 0. Outer structure terms are carried over with zero-padded Jacobians.
inline Nlp reformulate_l1_penalty(const Nlp& nlp, const std::vector<L1Term>& terms) {
  if (terms.empty()) return nlp;
  for (const L1Term& t : terms) {
    if (!(t.weight > 0.0)) throw SolverError(ErrorCode::Configuration, "L1 weight must be positive");
    if (t.coefficients.size() != nlp.n_v) throw SolverError(ErrorCode::DimensionMismatch, "L1 term coefficients");
  }
  const Index n0 = nlp.n_v;
  const Index nt = static_cast<Index>(terms.size());
  Nlp out;
  out.n_v = n0 + 2 * nt;
  out.n_g = nlp.n_g + nt;
  out.n_h = nlp.n_h + 2 * nt;
  auto base = [n0](const Vec& v) { return v.segment(0, n0); };

  out.f = [=](const Vec& v) {
    double val = nlp.f(base(v));
    for (Index i = 0; i < nt; ++i) val += terms[static_cast<std::size_t>(i)].weight * (v[n0 + 2 * i] + v[n0 + 2 * i + 1]);
    return val;
  };
  out.grad_f = [=](const Vec& v) {
    Vec grad(n0 + 2 * nt);
    grad.set_segment(0, nlp.grad_f(base(v)));
    for (Index i = 0; i < nt; ++i) grad[n0 + 2 * i] = grad[n0 + 2 * i + 1] = terms[static_cast<std::size_t>(i)].weight;
    return grad;
  };
  out.g = [=](const Vec& v) {
    const Vec x = base(v);
    Vec val(nlp.n_g + nt);
    val.set_segment(0, nlp.g(x));
    for (Index i = 0; i < nt; ++i) {
      const L1Term& t = terms[static_cast<std::size_t>(i)];
      val[nlp.n_g + i] = dot(t.coefficients, x) + t.offset - (v[n0 + 2 * i] - v[n0 + 2 * i + 1]);
    }
    return val;
  };
  out.jac_g = [=](const Vec& v) {
    Mat j(nlp.n_g + nt, n0 + 2 * nt);
    j.set_block(0, 0, nlp.jac_g(base(v)));
    for (Index i = 0; i < nt; ++i) {
      const L1Term& t = terms[static_cast<std::size_t>(i)];
      for (Index c = 0; c < n0; ++c) j(nlp.n_g + i, c) = t.coefficients[c];
      j(nlp.n_g + i, n0 + 2 * i) = -1.0;
      j(nlp.n_g + i, n0 + 2 * i + 1) = 1.0;
    }
    return j;
  };
  out.h = [=](const Vec& v) {
    Vec val(nlp.n_h + 2 * nt);
    val.set_segment(0, nlp.h(base(v)));
    for (Index i = 0; i < 2 * nt; ++i) val[nlp.n_h + i] = -v[n0 + i];
    return val;
  };
  out.jac_h = [=](const Vec& v) {
    Mat j(nlp.n_h + 2 * nt, n0 + 2 * nt);
    j.set_block(0, 0, nlp.jac_h(base(v)));
    for (Index i = 0; i < 2 * nt; ++i) j(nlp.n_h + i, n0 + i) = -1.0;
    return j;
  };
  out.hess_lagrangian = [=](const Vec& v, const Vec& lambda, const Vec& mu) {
    Mat hess(n0 + 2 * nt, n0 + 2 * nt);
    hess.set_block(0, 0, nlp.hess_lagrangian(base(v), lambda.segment(0, nlp.n_g), mu.segment(0, nlp.n_h)));
    return hess;
  };
  if (nlp.outer) {
    auto pad = [n0, nt](ConvexTerm t) {
      auto inner = t.inner;
      t.inner = [inner, n0, nt](const Vec& v, Vec& value, Mat& jac) {
        Mat j0;
        inner(v.segment(0, n0), value, j0);
        jac = Mat(j0.rows(), n0 + 2 * nt);
        jac.set_block(0, 0, j0);
      };
      return t;
    };
    OuterStructure s;
    for (const ConvexTerm& t : nlp.outer->objective) s.objective.push_back(pad(t));
    for (const ConvexTerm& t : nlp.outer->constraints) s.constraints.push_back(pad(t));
    out.outer = std::move(s);
  }
  return out;
}

}  // namespace aasqp
