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

// QP Hessian strategies. Exact returns the Lagrangian Hessian and is only usable together with a
// regularizer; GGN and SCQP build positive semidefinite approximations from the outer convexity
// metadata attached to an `Nlp`.

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "aasqp/errors.hpp"
#include "aasqp/linalg.hpp"
#include "aasqp/nlp.hpp"

namespace aasqp {

enum class HessianKind { Exact, GGN, SCQP, ExactLM, ExactProject };

struct HessianStrategy {
  HessianKind kind = HessianKind::ExactProject;
  double gamma_lm = 1e-4;
  double eps_proj = 1e-6;

  void validate() const {
    if (kind == HessianKind::Exact)
      throw SolverError(ErrorCode::Configuration, "exact Hessian requires a regularizer (exact+lm or exact+project)");
    if (!(gamma_lm >= 0.0)) throw SolverError(ErrorCode::Configuration, "gamma_lm must be >= 0");
    if (!(eps_proj > 0.0)) throw SolverError(ErrorCode::Configuration, "eps_proj must be > 0");
  }
};

inline std::string to_string(HessianKind k) {
  switch (k) {
    case HessianKind::Exact: return "exact";
    case HessianKind::GGN: return "ggn";
    case HessianKind::SCQP: return "scqp";
    case HessianKind::ExactLM: return "exact+lm";
    case HessianKind::ExactProject: return "exact+project";
  }
  return "?";
}

inline HessianKind parse_hessian_kind(const std::string& s) {
  if (s == "exact+project") return HessianKind::ExactProject;
  if (s == "exact+lm") return HessianKind::ExactLM;
  if (s == "ggn") return HessianKind::GGN;
  if (s == "scqp") return HessianKind::SCQP;
  if (s == "exact") return HessianKind::Exact;
  throw SolverError(ErrorCode::Configuration, "unknown Hessian strategy '" + s + "'");
}

inline Mat exact_hessian(const Nlp& nlp, const PrimalDualIterate& z) {
  return symmetrize(nlp.hess_lagrangian(z.v, z.lambda, z.mu));
}

namespace detail {

inline void add_gauss_newton_term(const ConvexTerm& t, const Vec& v, double weight, Mat& acc) {
  Vec y;
  Mat j;
  t.inner(v, y, j);
  // Stage terms touch a handful of variables; work on the nonzero columns only.
  std::vector<Index> support;
  for (Index c = 0; c < j.cols(); ++c) {
    for (Index r = 0; r < j.rows(); ++r) {
      if (j(r, c) != 0.0) {
        support.push_back(c);
        break;
      }
    }
  }
  Mat js(j.rows(), static_cast<Index>(support.size()));
  for (std::size_t c = 0; c < support.size(); ++c) js.set_col(static_cast<Index>(c), j.col(support[c]));
  const Mat block = congruence(js, t.outer_hessian(y));
  for (std::size_t a = 0; a < support.size(); ++a)
    for (std::size_t b = 0; b < support.size(); ++b)
      acc(support[a], support[b]) += weight * block(static_cast<Index>(a), static_cast<Index>(b));
}

}  // namespace detail

/// Σ J_iᵀ·∇²φ_i·J_i over the objective terms.
inline Mat ggn_hessian(const Nlp& nlp, const PrimalDualIterate& z) {
  if (!nlp.outer) throw SolverError(ErrorCode::MissingStructure, "GGN needs outer-convexity structure");
  Mat w(nlp.n_v, nlp.n_v);
  for (const ConvexTerm& t : nlp.outer->objective) detail::add_gauss_newton_term(t, z.v, 1.0, w);
  return symmetrize(w);
}

/// GGN plus Σ max(µ_i, 0)·J_iᵀ·∇²φ_i·J_i over the convex inequality terms, with µ from z.
inline Mat scqp_hessian(const Nlp& nlp, const PrimalDualIterate& z) {
  Mat w = ggn_hessian(nlp, z);
  for (const ConvexTerm& t : nlp.outer->constraints) {
    if (t.constraint_index < 0 || t.constraint_index >= nlp.n_h)
      throw SolverError(ErrorCode::MissingStructure, "constraint term without a valid inequality row");
    const double mu = std::max(z.mu[t.constraint_index], 0.0);
    if (mu > 0.0) detail::add_gauss_newton_term(t, z.v, mu, w);
  }
  return symmetrize(w);
}

inline Mat levenberg_marquardt(const Mat& w, double gamma_lm) {
  if (!(gamma_lm >= 0.0)) throw SolverError(ErrorCode::Configuration, "gamma_lm must be >= 0");
  Mat out = w;
  for (Index i = 0; i < w.rows(); ++i) out(i, i) += gamma_lm;
  return out;
}

/// V·diag(max(λ_i, ε))·Vᵀ
inline Mat project_regularize(const Mat& w, double eps_proj) {
  if (!(eps_proj > 0.0)) throw SolverError(ErrorCode::Configuration, "eps_proj must be > 0");
  const SymEig e = sym_eig(w);
  if (e.values.size() > 0 && e.values[0] >= eps_proj) return w;
  return symmetrize(spectral_map(e, [eps_proj](double l) { return std::max(l, eps_proj); }));
}

inline Mat qp_hessian(const Nlp& nlp, const PrimalDualIterate& z, const HessianStrategy& s) {
  s.validate();
  switch (s.kind) {
    case HessianKind::GGN: return ggn_hessian(nlp, z);
    case HessianKind::SCQP: return scqp_hessian(nlp, z);
    case HessianKind::ExactLM: return levenberg_marquardt(exact_hessian(nlp, z), s.gamma_lm);
    case HessianKind::ExactProject: return project_regularize(exact_hessian(nlp, z), s.eps_proj);
    case HessianKind::Exact: break;
  }
  throw SolverError(ErrorCode::Configuration, "exact Hessian requires a regularizer");
}

}  // namespace aasqp
