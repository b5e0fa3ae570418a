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

// Anderson acceleration of a fixed-point map z ↦ φ(z).
//
// With residuals r_j = φ(z_j) − z_j, the depth-m step solves
//
//     γ = argmin ‖r_k − F_k·γ‖₂
//     z_{k+1} = z_k − E_k·γ + β·(r_k − F_k·γ)
//
// where the columns of E_k (F_k) are the iterate (residual) differences z_j − z_{j−1}
// (r_j − r_{j−1}), newest first. The ratio θ_k = ‖r_k − F_k·γ‖₂ / ‖r_k‖₂ measures the gain of the
// step over a plain iteration.

#pragma once

#include <cmath>
#include <deque>
#include <limits>
#include <utility>

#include "aasqp/errors.hpp"
#include "aasqp/linalg.hpp"

namespace aasqp {

struct AndersonConfig {
  bool enabled = false;
  int m = 1;
  double beta = 1.0;
  double threshold = std::numeric_limits<double>::infinity();  // δ_AA on the KKT ∞-norm
  double collinearity_tol = 1e-14;
  /// Clear the history when acceleration switches from inactive to active. When false, pairs
  /// recorded above the threshold seed the first accelerated step.
  bool reset_on_activation = true;
  /// Clear the history whenever the QP active set changes (honored by the SQP driver).
  bool reset_on_active_set_change = true;

  void validate() const {
    if (m < 1) throw SolverError(ErrorCode::Configuration, "anderson depth must be >= 1");
    if (!(beta > 0.0 && beta <= 1.0)) throw SolverError(ErrorCode::Configuration, "anderson damping must be in (0, 1]");
    if (!(threshold > 0.0)) throw SolverError(ErrorCode::Configuration, "activation threshold must be > 0");
    if (!(collinearity_tol >= 0.0)) throw SolverError(ErrorCode::Configuration, "collinearity_tol must be >= 0");
  }
};

struct AndersonState {
  std::deque<std::pair<Vec, Vec>> history;  // (z_j, r_j), newest first, at most m + 1 entries
  double theta = std::numeric_limits<double>::quiet_NaN();
  Vec gamma;
  bool accelerated = false;  // last step used a nonempty history
  bool degenerate = false;   // last step fell back because of a degenerate secant
  bool was_active = false;

  void reset() { history.clear(); }

  /// Number of difference columns currently available.
  Index columns() const { return history.empty() ? 0 : static_cast<Index>(history.size()) - 1; }

  Mat iterate_differences() const { return differences(0); }
  Mat residual_differences() const { return differences(1); }

 private:
  Mat differences(int which) const {
    const Index cols = columns();
    const Index n = history.empty() ? 0 : history.front().first.size();
    Mat d(n, cols);
    for (Index j = 0; j < cols; ++j) {
      const auto& newer = history[static_cast<std::size_t>(j)];
      const auto& older = history[static_cast<std::size_t>(j + 1)];
      d.set_col(j, which == 0 ? newer.first - older.first : newer.second - older.second);
    }
    return d;
  }
};

inline bool should_activate(double kkt_norm_inf, const AndersonConfig& config) {
  return kkt_norm_inf < config.threshold;
}

/// Affine weights α (newest first, summing to one) with z_{k+1} = Σ α_j·φ(z_{k−j}) for β = 1.
inline Vec alpha_from_gamma(const Vec& gamma) {
  const Index m = gamma.size();
  Vec alpha(m + 1);
  alpha[0] = 1.0 - (m > 0 ? gamma[0] : 0.0);
  for (Index j = 1; j < m; ++j) alpha[j] = gamma[j - 1] - gamma[j];
  if (m > 0) alpha[m] = gamma[m - 1];
  return alpha;
}

/// AA(1): z_{k+1} = (1 − γ)·φ(z_k) + γ·φ(z_{k−1}) with γ = r_kᵀ(r_k − r_{k−1}) / ‖r_k − r_{k−1}‖².
inline Vec aa1_closed_form(const Vec& z_k, const Vec& z_km1, const Vec& r_k, const Vec& r_km1,
                           double collinearity_tol = 1e-14) {
  const Vec dr = r_k - r_km1;
  const double dr2 = dot(dr, dr);
  if (!(std::sqrt(dr2) > collinearity_tol * (norm2(r_k) + norm2(r_km1))))
    throw SolverError(ErrorCode::DegenerateSecant, "residual difference vanishes");
  const double gamma = dot(r_k, dr) / dr2;
  return (1.0 - gamma) * (z_k + r_k) + gamma * (z_km1 + r_km1);
}

/// One step of the accelerated iteration. The pair (z_k, φ(z_k) − z_k) is always recorded; the
/// accelerated update is only taken when `active` is set. Returns z_{k+1}.
inline Vec aa_step(AndersonState& state, const Vec& z_k, const Vec& phi_zk, const AndersonConfig& config,
                   bool active = true) {
  state.accelerated = false;
  state.degenerate = false;
  state.theta = std::numeric_limits<double>::quiet_NaN();
  state.gamma = Vec();
  if (!config.enabled) return phi_zk;

  if (active && !state.was_active && config.reset_on_activation) state.reset();
  state.was_active = active;

  Vec r = phi_zk - z_k;
  state.history.emplace_front(z_k, r);
  while (static_cast<Index>(state.history.size()) > config.m + 1) state.history.pop_back();

  auto plain = [&] { return config.beta == 1.0 ? phi_zk : z_k + config.beta * r; };
  if (!active || state.columns() == 0) return plain();

  const double r_norm = norm2(r);
  const auto& prev = state.history[1];
  const Vec dr_newest = r - prev.second;
  if (!(norm2(dr_newest) > config.collinearity_tol * (r_norm + norm2(prev.second)))) {
    state.degenerate = true;
    state.history.resize(1);
    return plain();
  }

  const Mat e = state.iterate_differences();
  const Mat f = state.residual_differences();
  const Vec gamma = qr_least_squares(f, r);
  const Vec combined = r - f * gamma;
  state.gamma = gamma;
  state.accelerated = true;
  state.theta = r_norm == 0.0 ? 1.0 : norm2(combined) / r_norm;
  return z_k - e * gamma + config.beta * combined;
}

}  // namespace aasqp
