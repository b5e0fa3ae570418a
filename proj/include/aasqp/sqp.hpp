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

// Full-step SQP-type iteration z_{k+1} = π(z_k), optionally wrapped in Anderson acceleration.
//
// π linearizes the NLP at z_k = (v, λ, µ), solves
//
//     minimize    ½·dᵀ·W·d + qᵀ·d
//     subject to  g(v) + Gᵀ·d  = 0
//                 h(v) + Hᵀ·d <= 0
//
// and returns (v + d, λ_QP, µ_QP). W comes from the configured Hessian strategy. In zero-order
// mode G is the equality Jacobian frozen at a reference point v̄; with the adjoint correction the
// gradient becomes q = ∇f + (∇g(v) − G)·λ so that the fixed point is stationary for the original
// problem. There is no globalization: iterates must start inside the local convergence region.

#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "aasqp/anderson.hpp"
#include "aasqp/errors.hpp"
#include "aasqp/hessians.hpp"
#include "aasqp/linalg.hpp"
#include "aasqp/nlp.hpp"
#include "aasqp/qp.hpp"

namespace aasqp {

struct SqpConfig {
  HessianStrategy hessian;
  bool zero_order = false;
  std::optional<Vec> frozen_point;  // v̄; the origin when unset
  bool adjoint_correction = false;
  int max_iter = 200;
  double kkt_tol = 1e-8;
  AndersonConfig anderson;
  std::optional<std::string> qp_dump_dir;  // writes qp_<iter>.txt per QP when set

  void validate() const {
    if (max_iter < 1) throw SolverError(ErrorCode::Configuration, "max_iter must be >= 1");
    if (!(kkt_tol > 0.0)) throw SolverError(ErrorCode::Configuration, "kkt_tol must be > 0");
    hessian.validate();
    anderson.validate();
  }
};

struct KktResidual {
  Vec stationarity;
  Vec eq_feas;
  Vec ineq_feas;
  Vec comp;
  double norm_inf = 0.0;
};

/// KKT residual of the original NLP with exact derivatives.
inline KktResidual kkt_residual(const Nlp& nlp, const PrimalDualIterate& z) {
  KktResidual r;
  r.stationarity = lagrangian_gradient(nlp, z.v, z.lambda, z.mu);
  r.eq_feas = nlp.n_g > 0 ? nlp.g(z.v) : Vec();
  const Vec h = nlp.n_h > 0 ? nlp.h(z.v) : Vec();
  r.ineq_feas = Vec(nlp.n_h);
  r.comp = Vec(nlp.n_h);
  for (Index i = 0; i < nlp.n_h; ++i) {
    r.ineq_feas[i] = std::max(h[i], 0.0);
    r.comp[i] = z.mu[i] * h[i];
  }
  r.norm_inf = std::max(std::max(norm_inf(r.stationarity), norm_inf(r.eq_feas)),
                        std::max(norm_inf(r.ineq_feas), norm_inf(r.comp)));
  return r;
}

/// Equality Jacobian at the freezing point, stored n_v × n_g like the QP's G.
inline Mat frozen_equality_jacobian(const Nlp& nlp, const SqpConfig& config) {
  const Vec v_bar = config.frozen_point.value_or(Vec(nlp.n_v));
  if (v_bar.size() != nlp.n_v) throw SolverError(ErrorCode::DimensionMismatch, "frozen point");
  return nlp.jac_g(v_bar).transpose();
}

/// QP data at z. `frozen_g` is the cached frozen Jacobian in zero-order mode (computed when null).
inline QpData linearize(const Nlp& nlp, const PrimalDualIterate& z, const SqpConfig& config,
                        const Mat* frozen_g = nullptr) {
  QpData qp;
  qp.q = nlp.grad_f(z.v);
  qp.g0 = nlp.n_g > 0 ? nlp.g(z.v) : Vec();
  qp.h0 = nlp.n_h > 0 ? nlp.h(z.v) : Vec();
  if (!std::isfinite(nlp.f(z.v)) || !qp.q.all_finite() || !qp.g0.all_finite() || !qp.h0.all_finite())
    throw SolverError(ErrorCode::LinearizationFailure, "non-finite function values");
  const Mat g_exact = nlp.n_g > 0 ? nlp.jac_g(z.v).transpose() : Mat(nlp.n_v, 0);
  if (config.zero_order && nlp.n_g > 0) {
    qp.G = frozen_g ? *frozen_g : frozen_equality_jacobian(nlp, config);
    if (config.adjoint_correction) qp.q += (g_exact - qp.G) * z.lambda;
  } else {
    qp.G = g_exact;
  }
  qp.H = nlp.n_h > 0 ? nlp.jac_h(z.v).transpose() : Mat(nlp.n_v, 0);
  qp.W = qp_hessian(nlp, z, config.hessian);
  if (!qp.W.all_finite() || !qp.G.all_finite() || !qp.H.all_finite())
    throw SolverError(ErrorCode::LinearizationFailure, "non-finite derivatives");
  return qp;
}

struct SqpStep {
  PrimalDualIterate z;
  std::vector<Index> active_set;
  int qp_iterations = 0;
};

/// π(z)
inline SqpStep sqp_step(const Nlp& nlp, const PrimalDualIterate& z, const SqpConfig& config,
                        const std::vector<Index>* warm_start = nullptr, const Mat* frozen_g = nullptr) {
  const QpData qp = linearize(nlp, z, config, frozen_g);
  const QpSolution s = solve_qp(qp, warm_start);
  SqpStep out;
  out.z.v = z.v + s.d;
  out.z.lambda = s.lambda;
  out.z.mu = s.mu;
  out.active_set = s.active_set;
  out.qp_iterations = s.iterations;
  return out;
}

/// p = (∇f − q) + (∇g − G)·λ + (∇h − H)·µ at z with the strategy's inexact quantities. A fixed
/// point of the inexact iteration is a KKT point of the NLP with objective f(v) − pᵀv.
inline Vec perturbation_vector(const Nlp& nlp, const PrimalDualIterate& z, const SqpConfig& config) {
  const QpData qp = linearize(nlp, z, config);
  Vec p = nlp.grad_f(z.v) - qp.q;
  if (nlp.n_g > 0) p += (nlp.jac_g(z.v).transpose() - qp.G) * z.lambda;
  if (nlp.n_h > 0) p += (nlp.jac_h(z.v).transpose() - qp.H) * z.mu;
  return p;
}

struct IterationRecord {
  int iter = 0;
  double kkt_inf = 0.0;
  double step_inf = 0.0;  // ‖π(z_k) − z_k‖∞
  double theta = std::numeric_limits<double>::quiet_NaN();
  bool aa_active = false;
  double obj = 0.0;
};

/// Which logged residual a convergence measure refers to. Exact-derivative methods are judged by
/// the KKT residual; zero-order iterations stall at a nonzero KKT residual and use the step norm.
enum class ResidualKind { Kkt, Step };

struct ConvergenceReport {
  std::vector<IterationRecord> rows;

  /// Inverse of write_csv. Throws Configuration on malformed input.
  static ConvergenceReport read_csv(std::istream& is) {
    ConvergenceReport out;
    std::string line;
    if (!std::getline(is, line) || line != "iter,kkt_inf,step_inf,theta_k,aa_active,obj")
      throw SolverError(ErrorCode::Configuration, "unexpected convergence CSV header");
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
      if (cells.size() != 6) throw SolverError(ErrorCode::Configuration, "malformed convergence CSV row: " + line);
      IterationRecord r;
      try {
        r.iter = std::stoi(cells[0]);
        r.kkt_inf = std::strtod(cells[1].c_str(), nullptr);
        r.step_inf = std::strtod(cells[2].c_str(), nullptr);
        r.theta = std::strtod(cells[3].c_str(), nullptr);
        r.aa_active = std::stoi(cells[4]) != 0;
        r.obj = std::strtod(cells[5].c_str(), nullptr);
      } catch (const std::exception&) {
        throw SolverError(ErrorCode::Configuration, "malformed convergence CSV row: " + line);
      }
      out.rows.push_back(r);
    }
    return out;
  }

  void write_csv(std::ostream& os) const {
    os << "iter,kkt_inf,step_inf,theta_k,aa_active,obj\n";
    char buf[160];
    for (const IterationRecord& r : rows) {
      char theta[32];
      if (std::isnan(r.theta))
        std::snprintf(theta, sizeof theta, "nan");
      else
        std::snprintf(theta, sizeof theta, "%.17g", r.theta);
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%s,%d,%.17g\n", r.iter, r.kkt_inf, r.step_inf, theta,
                    r.aa_active ? 1 : 0, r.obj);
      os << buf;
    }
  }

  /// First iteration whose logged residual is at or below `tol`, −1 if never.
  int iterations_to(double tol, ResidualKind kind = ResidualKind::Kkt) const {
    for (const IterationRecord& r : rows)
      if ((kind == ResidualKind::Kkt ? r.kkt_inf : r.step_inf) <= tol) return r.iter;
    return -1;
  }
};

/// Per-iteration hook. `z_next` is the iterate actually taken (accelerated or plain).
struct IterationEvent {
  int iter = 0;
  const PrimalDualIterate* z = nullptr;
  const PrimalDualIterate* phi = nullptr;
  const PrimalDualIterate* z_next = nullptr;
  const AndersonState* anderson = nullptr;
  bool active_set_changed = false;
};

enum class SolveStatus { Converged, MaxIterReached, Failed };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterReached: return "max_iter_reached";
    case SolveStatus::Failed: return "failed";
  }
  return "?";
}

struct SolveResult {
  SolveStatus status = SolveStatus::Failed;
  PrimalDualIterate z;
  ConvergenceReport report;
  std::vector<Index> active_set;
  std::string message;
  std::optional<ErrorCode> error;
};

/// Runs the (accelerated) iteration from z0. Exact-derivative runs stop when the KKT residual
/// reaches kkt_tol; zero-order runs stop when ‖π(z_k) − z_k‖∞ does, since their KKT residual
/// stalls at the perturbed solution. Solver errors end the run with status Failed and keep the
/// report collected so far.
inline SolveResult solve(const Nlp& nlp, const PrimalDualIterate& z0, const SqpConfig& config,
                         const std::function<void(const IterationEvent&)>& observer = {}) {
  config.validate();
  validate_dimensions(nlp, z0.v);
  SolveResult res;
  res.z = z0;
  if (res.z.lambda.size() != nlp.n_g) res.z.lambda = Vec(nlp.n_g);
  if (res.z.mu.size() != nlp.n_h) res.z.mu = Vec(nlp.n_h);

  std::optional<Mat> frozen;
  AndersonState aa;
  std::vector<Index> active;
  bool have_active = false;
  if (config.qp_dump_dir) std::filesystem::create_directories(*config.qp_dump_dir);

  try {
    if (config.zero_order && nlp.n_g > 0) frozen = frozen_equality_jacobian(nlp, config);
    for (int k = 0;; ++k) {
      IterationRecord rec;
      rec.iter = k;
      rec.kkt_inf = kkt_residual(nlp, res.z).norm_inf;
      rec.obj = nlp.f(res.z.v);
      if (!std::isfinite(rec.kkt_inf)) throw SolverError(ErrorCode::LinearizationFailure, "non-finite KKT residual");

      if (config.qp_dump_dir) {
        std::ofstream os(*config.qp_dump_dir + "/qp_" + std::to_string(k) + ".txt");
        write_qp(linearize(nlp, res.z, config, frozen ? &*frozen : nullptr), os);
      }
      const SqpStep step = sqp_step(nlp, res.z, config, have_active ? &active : nullptr, frozen ? &*frozen : nullptr);
      const Vec zk = res.z.pack();
      const Vec phi = step.z.pack();
      rec.step_inf = norm_inf(phi - zk);

      const bool done = config.zero_order ? rec.step_inf <= config.kkt_tol : rec.kkt_inf <= config.kkt_tol;
      if (done || k >= config.max_iter) {
        res.report.rows.push_back(rec);
        res.active_set = have_active ? active : step.active_set;
        res.status = done ? SolveStatus::Converged : SolveStatus::MaxIterReached;
        if (!done) res.message = "no convergence within " + std::to_string(config.max_iter) + " iterations";
        return res;
      }

      const bool changed = have_active && step.active_set != active;
      if (changed && config.anderson.reset_on_active_set_change) aa.reset();
      active = step.active_set;
      have_active = true;

      const bool on = config.anderson.enabled && should_activate(rec.kkt_inf, config.anderson);
      const Vec next = aa_step(aa, zk, phi, config.anderson, on);
      rec.aa_active = aa.accelerated;
      rec.theta = aa.theta;
      res.report.rows.push_back(rec);

      const PrimalDualIterate z_next = PrimalDualIterate::unpack(nlp, next);
      if (observer) {
        IterationEvent ev;
        ev.iter = k;
        ev.z = &res.z;
        ev.phi = &step.z;
        ev.z_next = &z_next;
        ev.anderson = &aa;
        ev.active_set_changed = changed;
        observer(ev);
      }
      res.z = z_next;
    }
  } catch (const SolverError& e) {
    res.status = SolveStatus::Failed;
    res.error = e.code();
    res.message = std::string(to_string(e.code())) + ": " + e.what();
  }
  return res;
}

}  // namespace aasqp
