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

// Local convergence diagnostics at a fixed point z★ of the SQP map π.
//
// The iteration matrix A★ = ∂π/∂z(z★) is estimated by central differences of π restricted to the
// coordinates (v, λ, µ_active); its spectral radius predicts the asymptotic linear rate. In the
// symmetric case (exact first derivatives) the rate is also bounded through the reduced matrices
// Ŵ★ = ZᵀW★Z and Λ̂★ = Zᵀ∇²L★Z on the nullspace of the active constraints.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "aasqp/errors.hpp"
#include "aasqp/linalg.hpp"
#include "aasqp/nlp.hpp"
#include "aasqp/sqp.hpp"

namespace aasqp {

struct IterationMatrix {
  Mat a;                           // restricted ∂π/∂z
  std::vector<Index> active_set;   // inequality rows of the fixed active set
  std::vector<Index> coordinates;  // positions in the packed z = (v, λ, µ)
  double h_fd = 0.0;
};

inline double default_fd_step(const PrimalDualIterate& z) { return 1e-5 * (1.0 + norm_inf(z.pack())); }

/// Central-difference Jacobian of π at `z_star`. Throws ActiveSetUnstable when strict
/// complementarity is too weak for the step or when a perturbed QP changes its active set.
/// `jobs` > 1 evaluates columns on worker threads; the result does not depend on it.
inline IterationMatrix estimate_iteration_matrix(const Nlp& nlp, const PrimalDualIterate& z_star,
                                                 const SqpConfig& config, std::optional<double> h_fd = std::nullopt,
                                                 int jobs = 1) {
  config.validate();
  IterationMatrix out;
  out.h_fd = h_fd.value_or(default_fd_step(z_star));
  const double h = out.h_fd;
  std::optional<Mat> frozen;
  if (config.zero_order && nlp.n_g > 0) frozen = frozen_equality_jacobian(nlp, config);
  const Mat* fg = frozen ? &*frozen : nullptr;

  const SqpStep base = sqp_step(nlp, z_star, config, nullptr, fg);
  out.active_set = base.active_set;

  std::vector<char> is_active(static_cast<std::size_t>(nlp.n_h), 0);
  for (Index i : out.active_set) is_active[static_cast<std::size_t>(i)] = 1;
  const Vec hv = nlp.n_h > 0 ? nlp.h(z_star.v) : Vec();
  for (Index i = 0; i < nlp.n_h; ++i) {
    const bool weak = is_active[static_cast<std::size_t>(i)] ? z_star.mu[i] <= 10.0 * h : std::abs(hv[i]) <= 10.0 * h;
    if (weak) throw SolverError(ErrorCode::ActiveSetUnstable, "strict complementarity too weak at row " + std::to_string(i));
  }

  const Index n_vl = nlp.n_v + nlp.n_g;
  for (Index i = 0; i < n_vl; ++i) out.coordinates.push_back(i);
  for (Index i : out.active_set) out.coordinates.push_back(n_vl + i);
  const Index n = static_cast<Index>(out.coordinates.size());
  out.a = Mat(n, n);

  const Vec z0 = z_star.pack();
  std::optional<SolverError> failure;
  std::mutex failure_mutex;
  auto column = [&](Index c) {
    try {
      Vec zp = z0, zm = z0;
      const Index pos = out.coordinates[static_cast<std::size_t>(c)];
      zp[pos] += h;
      zm[pos] -= h;
      const SqpStep sp = sqp_step(nlp, PrimalDualIterate::unpack(nlp, zp), config, &base.active_set, fg);
      const SqpStep sm = sqp_step(nlp, PrimalDualIterate::unpack(nlp, zm), config, &base.active_set, fg);
      if (sp.active_set != base.active_set || sm.active_set != base.active_set)
        throw SolverError(ErrorCode::ActiveSetUnstable, "active set changed under perturbation");
      const Vec d = (1.0 / (2.0 * h)) * (sp.z.pack() - sm.z.pack());
      for (Index r = 0; r < n; ++r) out.a(r, c) = d[out.coordinates[static_cast<std::size_t>(r)]];
    } catch (const SolverError& e) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = e;
    }
  };
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
  if (workers == 1) {
    for (Index c = 0; c < n; ++c) column(c);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (Index c = w; c < n; c += workers) column(c);
      });
    for (std::thread& t : pool) t.join();
  }
  if (failure) throw *failure;
  return out;
}

/// Smallest κ with −κ·W ⪯ Λ − W ⪯ κ·W, i.e. max |eig(W^{-1/2}·(Λ − W)·W^{-1/2})|.
inline double kappa_bound_symmetric(const Mat& w_hat, const Mat& lambda_hat) {
  if (w_hat.rows() != lambda_hat.rows() || w_hat.cols() != lambda_hat.cols())
    throw SolverError(ErrorCode::DimensionMismatch, "kappa_bound_symmetric");
  if (w_hat.rows() == 0) return 0.0;
  cholesky(symmetrize(w_hat));  // throws NotPositiveDefinite
  const SymEig e = sym_eig(symmetrize(w_hat));
  const Mat inv_sqrt = spectral_map(e, [](double l) { return 1.0 / std::sqrt(l); });
  const Mat m = symmetrize(inv_sqrt * (lambda_hat - w_hat) * inv_sqrt);
  const SymEig em = sym_eig(m);
  return std::max(std::abs(em.values[0]), std::abs(em.values[em.values.size() - 1]));
}

struct ReducedMatrices {
  Mat w_hat;       // ZᵀW★Z with the strategy's Hessian
  Mat lambda_hat;  // Zᵀ∇²L★Z
  Mat z;           // orthonormal nullspace basis
  std::vector<Index> active_set;
};

/// Reduced matrices at z★. The active set is taken from the QP at z★ unless given.
inline ReducedMatrices reduced_matrices(const Nlp& nlp, const PrimalDualIterate& z_star, const SqpConfig& config,
                                        std::optional<std::vector<Index>> active = std::nullopt) {
  ReducedMatrices out;
  out.active_set = active ? *active : sqp_step(nlp, z_star, config).active_set;
  const Index na = static_cast<Index>(out.active_set.size());
  Mat a(nlp.n_v, nlp.n_g + na);
  if (nlp.n_g > 0) a.set_block(0, 0, nlp.jac_g(z_star.v).transpose());
  if (na > 0) {
    const Mat jh = nlp.jac_h(z_star.v);
    for (Index k = 0; k < na; ++k) a.set_col(nlp.n_g + k, jh.row(out.active_set[static_cast<std::size_t>(k)]));
  }
  Index rank = 0;
  out.z = nullspace_of_transpose(a, &rank);
  if (rank < a.cols()) throw SolverError(ErrorCode::RankDeficientConstraints, "active constraints violate LICQ");
  out.w_hat = symmetrize(congruence(out.z, qp_hessian(nlp, z_star, config.hessian)));
  out.lambda_hat = symmetrize(congruence(out.z, exact_hessian(nlp, z_star)));
  return out;
}

/// Ŵ ⪰ ½Λ̂ − tol·I
inline bool necessary_condition_holds(const Mat& w_hat, const Mat& lambda_hat, double tol = 1e-8) {
  if (w_hat.rows() == 0) return true;
  return min_eigenvalue(symmetrize(w_hat - 0.5 * lambda_hat)) >= -tol;
}

struct RateEstimate {
  double observed_rate = 0.0;
  double predicted_kappa = std::numeric_limits<double>::quiet_NaN();
  int tail_start = 0;
  double agreement = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> ratios;  // successive residual ratios over the tail

  void set_prediction(double kappa) {
    predicted_kappa = kappa;
    agreement = std::abs(observed_rate - kappa);
  }
};

/// Geometric mean of r_{k+1}/r_k over the last `tail_fraction` of the non-accelerated iterations
/// whose residual is above 1e-12 times the initial one.
inline RateEstimate observed_rate(const ConvergenceReport& report, double tail_fraction = 0.4,
                                  ResidualKind kind = ResidualKind::Kkt) {
  auto value = [kind](const IterationRecord& r) { return kind == ResidualKind::Kkt ? r.kkt_inf : r.step_inf; };
  if (report.rows.empty()) throw SolverError(ErrorCode::InsufficientTail, "empty report");
  const double floor = 1e-12 * value(report.rows.front());
  std::vector<std::size_t> eligible;
  for (std::size_t k = 0; k < report.rows.size(); ++k)
    if (!report.rows[k].aa_active && value(report.rows[k]) > floor) eligible.push_back(k);
  const std::size_t count = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(eligible.size())));
  const std::size_t tail = std::max<std::size_t>(count, 6);
  if (eligible.size() < tail) throw SolverError(ErrorCode::InsufficientTail, "fewer than 6 tail iterations");
  RateEstimate est;
  const std::size_t first = eligible.size() - tail;
  est.tail_start = report.rows[eligible[first]].iter;
  double log_sum = 0.0;
  for (std::size_t i = first; i + 1 < eligible.size(); ++i) {
    const std::size_t k = eligible[i];
    if (eligible[i + 1] != k + 1) continue;
    const double ratio = value(report.rows[k + 1]) / value(report.rows[k]);
    est.ratios.push_back(ratio);
    log_sum += std::log(ratio);
  }
  if (est.ratios.size() < 2) throw SolverError(ErrorCode::InsufficientTail, "no consecutive tail pairs");
  est.observed_rate = std::exp(log_sum / static_cast<double>(est.ratios.size()));
  return est;
}

inline nlohmann::json analysis_summary(const RateEstimate& rate, double kappa_bound, const ConvergenceReport& report) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json theta = nlohmann::json::array();
  for (const IterationRecord& r : report.rows)
    if (r.aa_active) theta.push_back(r.theta);
  return {{"observed_rate", num(rate.observed_rate)},
          {"predicted_kappa", num(rate.predicted_kappa)},
          {"kappa_bound", num(kappa_bound)},
          {"theta_history", theta}};
}

}  // namespace aasqp
