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

// Direct multiple-shooting transcription of a continuous-time optimal control problem.
//
// Variable ordering is fixed: v = (x_0, u_0, x_1, u_1, …, x_{N−1}, u_{N−1}, x_N).
// Equalities:   g = (x_0 − x̄_0, x_1 − Φ(x_0, u_0), …, x_N − Φ(x_{N−1}, u_{N−1}))
// Inequalities: for every k with control bounds (u_k − ub, lb − u_k), then one row per terminal
//               ball ‖y(x_N) − c‖² − ρ² ≤ 0.
// Objective:    Σ_k x_kᵀ·diag(q)·x_k + u_kᵀ·diag(r)·u_k + x_Nᵀ·diag(q_N)·x_N  (no implicit ½).
//
// Φ is an explicit integrator over one shooting interval; its sensitivities are propagated in
// forward mode through the integrator stages. The exact Lagrangian Hessian obtains the dynamics
// curvature by central differences of the contracted sensitivity Φ_wᵀ·λ.

#pragma once

#include <memory>
#include <string>
#include <utility>

#include "aasqp/dual.hpp"
#include "aasqp/errors.hpp"
#include "aasqp/linalg.hpp"
#include "aasqp/nlp.hpp"

namespace aasqp {

/// Type-erased continuous-time dynamics ẋ = f(x, u) with an output map y(x).
struct Dynamics {
  std::string name;
  Index nx = 0;
  Index nu = 0;
  Index ny = 0;
  std::function<void(const double* x, const double* u, double* xdot)> rhs;
  /// ẋ and ∂ẋ/∂(x, u) as an nx × (nx + nu) matrix.
  std::function<void(const double* x, const double* u, double* xdot, Mat& jac)> rhs_jacobian;
  /// y and ∂y/∂x as an ny × nx matrix.
  std::function<void(const double* x, double* y, Mat& jac)> output;
};

/// Wraps a model with templated `rhs` and `output` members, differentiated by forward-mode duals.
template <class Model>
Dynamics make_dynamics(std::string name, Model model) {
  constexpr int nx = Model::nx;
  constexpr int nu = Model::nu;
  constexpr int ny = Model::ny;
  Dynamics d;
  d.name = std::move(name);
  d.nx = nx;
  d.nu = nu;
  d.ny = ny;
  d.rhs = [model](const double* x, const double* u, double* xdot) { model.rhs(x, u, xdot); };
  d.rhs_jacobian = [model](const double* x, const double* u, double* xdot, Mat& jac) {
    using D = Dual<nx + nu>;
    std::array<D, nx> xd;
    std::array<D, nu> ud;
    std::array<D, nx> out;
    for (int i = 0; i < nx; ++i) xd[i] = D::variable(x[i], i);
    for (int i = 0; i < nu; ++i) ud[i] = D::variable(u[i], nx + i);
    model.rhs(xd.data(), ud.data(), out.data());
    jac = Mat(nx, nx + nu);
    for (int i = 0; i < nx; ++i) {
      xdot[i] = out[i].v;
      for (int j = 0; j < nx + nu; ++j) jac(i, j) = out[i].d[j];
    }
  };
  d.output = [model](const double* x, double* y, Mat& jac) {
    using D = Dual<nx>;
    std::array<D, nx> xd;
    std::array<D, ny> out;
    for (int i = 0; i < nx; ++i) xd[i] = D::variable(x[i], i);
    model.output(xd.data(), out.data());
    jac = Mat(ny, nx);
    for (int i = 0; i < ny; ++i) {
      y[i] = out[i].v;
      for (int j = 0; j < nx; ++j) jac(i, j) = out[i].d[j];
    }
  };
  return d;
}

enum class Integrator { ExplicitEuler, Rk4 };

inline const char* to_string(Integrator i) { return i == Integrator::Rk4 ? "rk4" : "euler"; }

/// One shooting interval of length dt split into `steps` integrator steps. When `sens` is
/// non-null it receives ∂x_next/∂(x, u) (nx × (nx + nu)).
inline Vec integrate(const Dynamics& dyn, Integrator method, int steps, double dt, const Vec& x, const Vec& u,
                     Mat* sens = nullptr) {
  const Index nx = dyn.nx;
  const Index nu = dyn.nu;
  const Index nw = nx + nu;
  const double h = dt / steps;
  Vec xc = x;
  Mat s;
  if (sens) {
    s = Mat(nx, nw);
    for (Index i = 0; i < nx; ++i) s(i, i) = 1.0;
  }
  // Derivative of f(x(w), u) w.r.t. w given state sensitivity sx.
  auto chain = [&](const Mat& jac, const Mat& sx) {
    Mat k = jac.block(0, 0, nx, nx) * sx;
    for (Index j = 0; j < nu; ++j)
      for (Index i = 0; i < nx; ++i) k(i, nx + j) += jac(i, nx + j);
    return k;
  };
  auto eval = [&](const Vec& xs, const Mat& ss, Vec& k, Mat& kk) {
    k = Vec(nx);
    if (sens) {
      Mat jac;
      dyn.rhs_jacobian(xs.data(), u.data(), k.data(), jac);
      kk = chain(jac, ss);
    } else {
      dyn.rhs(xs.data(), u.data(), k.data());
    }
  };
  for (int step = 0; step < steps; ++step) {
    if (method == Integrator::ExplicitEuler) {
      Vec k1;
      Mat kk1;
      eval(xc, s, k1, kk1);
      axpy(h, k1, xc);
      if (sens) s += h * kk1;
      continue;
    }
    Vec k1, k2, k3, k4;
    Mat kk1, kk2, kk3, kk4;
    eval(xc, s, k1, kk1);
    eval(xc + (0.5 * h) * k1, sens ? s + (0.5 * h) * kk1 : s, k2, kk2);
    eval(xc + (0.5 * h) * k2, sens ? s + (0.5 * h) * kk2 : s, k3, kk3);
    eval(xc + h * k3, sens ? s + h * kk3 : s, k4, kk4);
    for (Index i = 0; i < nx; ++i) xc[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (sens) {
      for (Index j = 0; j < nw; ++j)
        for (Index i = 0; i < nx; ++i)
          s(i, j) += h / 6.0 * (kk1(i, j) + 2.0 * kk2(i, j) + 2.0 * kk3(i, j) + kk4(i, j));
    }
  }
  if (sens) *sens = std::move(s);
  return xc;
}

/// ‖y(x_N) − center‖² − radius² ≤ 0. With `on_output` false the ball acts on the state itself.
struct TerminalBall {
  bool on_output = true;
  Vec center;
  double radius = 0.0;
};

struct ControlBounds {
  Vec lower;
  Vec upper;
};

struct OcpSpec {
  Dynamics dynamics;
  Index intervals = 1;  // N
  double horizon = 1.0;  // T
  Vec initial_state;
  Vec state_weight;     // q, stage cost x_kᵀ·diag(q)·x_k
  Vec control_weight;   // r, stage cost u_kᵀ·diag(r)·u_k
  Vec terminal_weight;  // q_N
  std::optional<ControlBounds> control_bounds;
  std::vector<TerminalBall> terminal_balls;

  void validate() const {
    auto fail = [](ErrorCode c, const std::string& what) { throw SolverError(c, "OcpSpec: " + what); };
    const Index nx = dynamics.nx;
    const Index nu = dynamics.nu;
    if (intervals < 1) fail(ErrorCode::Configuration, "intervals must be >= 1");
    if (!(horizon > 0.0)) fail(ErrorCode::Configuration, "horizon must be positive");
    if (initial_state.size() != nx) fail(ErrorCode::DimensionMismatch, "initial_state");
    if (state_weight.size() != nx) fail(ErrorCode::DimensionMismatch, "state_weight");
    if (control_weight.size() != nu) fail(ErrorCode::DimensionMismatch, "control_weight");
    if (terminal_weight.size() != nx) fail(ErrorCode::DimensionMismatch, "terminal_weight");
    if (control_bounds) {
      if (control_bounds->lower.size() != nu || control_bounds->upper.size() != nu)
        fail(ErrorCode::DimensionMismatch, "control_bounds");
      for (Index i = 0; i < nu; ++i)
        if (control_bounds->lower[i] > control_bounds->upper[i]) fail(ErrorCode::Configuration, "lower > upper");
    }
    for (const TerminalBall& b : terminal_balls) {
      if (b.center.size() != (b.on_output ? dynamics.ny : nx)) fail(ErrorCode::DimensionMismatch, "terminal ball center");
      if (!(b.radius >= 0.0)) fail(ErrorCode::Configuration, "terminal ball radius");
    }
  }
};

/// Index bookkeeping for the fixed variable ordering.
struct OcpLayout {
  Index nx = 0;
  Index nu = 0;
  Index intervals = 0;

  explicit OcpLayout(const OcpSpec& spec)
      : nx(spec.dynamics.nx), nu(spec.dynamics.nu), intervals(spec.intervals) {}

  Index stage_size() const { return nx + nu; }
  Index state(Index k) const { return k * stage_size(); }
  Index control(Index k) const { return k * stage_size() + nx; }
  Index n_v() const { return intervals * stage_size() + nx; }
  Index n_g() const { return (intervals + 1) * nx; }

  Vec x(const Vec& v, Index k) const { return v.segment(state(k), nx); }
  Vec u(const Vec& v, Index k) const { return v.segment(control(k), nu); }
};

namespace detail {

struct OcpModel {
  OcpSpec spec;
  Integrator method;
  int steps;
  OcpLayout layout;
  double dt;

  OcpModel(OcpSpec s, Integrator m, int st)
      : spec(std::move(s)), method(m), steps(st), layout(spec), dt(spec.horizon / static_cast<double>(spec.intervals)) {}

  Index n_bounds() const { return spec.control_bounds ? 2 * layout.nu * layout.intervals : 0; }
  Index n_h() const { return n_bounds() + static_cast<Index>(spec.terminal_balls.size()); }

  Vec shoot(const Vec& v, Index k, Mat* sens) const {
    return integrate(spec.dynamics, method, steps, dt, layout.x(v, k), layout.u(v, k), sens);
  }

  void ball_eval(const TerminalBall& b, const Vec& xn, Vec& y, Mat& jy) const {
    const Index nx = layout.nx;
    if (b.on_output) {
      y = Vec(spec.dynamics.ny);
      spec.dynamics.output(xn.data(), y.data(), jy);
    } else {
      y = xn;
      jy = Mat::identity(nx);
    }
    y -= b.center;
  }

  /// ∇_{x_N} of the ball constraint.
  Vec ball_gradient(const TerminalBall& b, const Vec& xn) const {
    Vec y;
    Mat jy;
    ball_eval(b, xn, y, jy);
    return 2.0 * tmul(jy, y);
  }
};

}  // namespace detail

/// Builds the multiple-shooting NLP. Outer structure: one objective term per stage with
/// outer Hessian 2·diag(q, r) (and 2·diag(q_N) at the end), one constraint term per terminal
/// ball with φ(y) = ‖y‖² − ρ² and inner function y(x_N) − c.
inline Nlp build_ocp_nlp(const OcpSpec& spec, Integrator integrator, int steps_per_interval) {
  spec.validate();
  if (steps_per_interval < 1) throw SolverError(ErrorCode::Configuration, "steps_per_interval must be >= 1");
  auto model = std::make_shared<const detail::OcpModel>(spec, integrator, steps_per_interval);
  const OcpLayout& lay = model->layout;
  const Index nx = lay.nx;
  const Index nu = lay.nu;
  const Index n_int = lay.intervals;
  const Index nw = nx + nu;

  Nlp nlp;
  nlp.n_v = lay.n_v();
  nlp.n_g = lay.n_g();
  nlp.n_h = model->n_h();

  nlp.f = [model](const Vec& v) {
    const OcpLayout& l = model->layout;
    const OcpSpec& s = model->spec;
    double cost = 0.0;
    for (Index k = 0; k < l.intervals; ++k) {
      for (Index i = 0; i < l.nx; ++i) cost += s.state_weight[i] * v[l.state(k) + i] * v[l.state(k) + i];
      for (Index i = 0; i < l.nu; ++i) cost += s.control_weight[i] * v[l.control(k) + i] * v[l.control(k) + i];
    }
    for (Index i = 0; i < l.nx; ++i) cost += s.terminal_weight[i] * v[l.state(l.intervals) + i] * v[l.state(l.intervals) + i];
    return cost;
  };
  nlp.grad_f = [model](const Vec& v) {
    const OcpLayout& l = model->layout;
    const OcpSpec& s = model->spec;
    Vec grad(l.n_v());
    for (Index k = 0; k < l.intervals; ++k) {
      for (Index i = 0; i < l.nx; ++i) grad[l.state(k) + i] = 2.0 * s.state_weight[i] * v[l.state(k) + i];
      for (Index i = 0; i < l.nu; ++i) grad[l.control(k) + i] = 2.0 * s.control_weight[i] * v[l.control(k) + i];
    }
    for (Index i = 0; i < l.nx; ++i) grad[l.state(l.intervals) + i] = 2.0 * s.terminal_weight[i] * v[l.state(l.intervals) + i];
    return grad;
  };
  nlp.g = [model](const Vec& v) {
    const OcpLayout& l = model->layout;
    Vec g(l.n_g());
    g.set_segment(0, l.x(v, 0) - model->spec.initial_state);
    for (Index k = 0; k < l.intervals; ++k) g.set_segment((k + 1) * l.nx, l.x(v, k + 1) - model->shoot(v, k, nullptr));
    return g;
  };
  nlp.jac_g = [model](const Vec& v) {
    const OcpLayout& l = model->layout;
    Mat j(l.n_g(), l.n_v());
    for (Index i = 0; i < l.nx; ++i) j(i, l.state(0) + i) = 1.0;
    for (Index k = 0; k < l.intervals; ++k) {
      Mat sens;
      model->shoot(v, k, &sens);
      const Index row = (k + 1) * l.nx;
      j.add_block(row, l.state(k), sens, -1.0);
      for (Index i = 0; i < l.nx; ++i) j(row + i, l.state(k + 1) + i) = 1.0;
    }
    return j;
  };
  nlp.h = [model](const Vec& v) {
    const OcpLayout& l = model->layout;
    Vec h(model->n_h());
    Index row = 0;
    if (model->spec.control_bounds) {
      const ControlBounds& b = *model->spec.control_bounds;
      for (Index k = 0; k < l.intervals; ++k) {
        for (Index i = 0; i < l.nu; ++i) h[row++] = v[l.control(k) + i] - b.upper[i];
        for (Index i = 0; i < l.nu; ++i) h[row++] = b.lower[i] - v[l.control(k) + i];
      }
    }
    const Vec xn = l.x(v, l.intervals);
    for (const TerminalBall& ball : model->spec.terminal_balls) {
      Vec y;
      Mat jy;
      model->ball_eval(ball, xn, y, jy);
      h[row++] = dot(y, y) - ball.radius * ball.radius;
    }
    return h;
  };
  nlp.jac_h = [model](const Vec& v) {
    const OcpLayout& l = model->layout;
    Mat j(model->n_h(), l.n_v());
    Index row = 0;
    if (model->spec.control_bounds) {
      for (Index k = 0; k < l.intervals; ++k) {
        for (Index i = 0; i < l.nu; ++i) j(row++, l.control(k) + i) = 1.0;
        for (Index i = 0; i < l.nu; ++i) j(row++, l.control(k) + i) = -1.0;
      }
    }
    const Vec xn = l.x(v, l.intervals);
    for (const TerminalBall& ball : model->spec.terminal_balls) {
      const Vec grad = model->ball_gradient(ball, xn);
      for (Index i = 0; i < l.nx; ++i) j(row, l.state(l.intervals) + i) = grad[i];
      ++row;
    }
    return j;
  };
  nlp.hess_lagrangian = [model](const Vec& v, const Vec& lambda, const Vec& mu) {
    const OcpLayout& l = model->layout;
    const OcpSpec& s = model->spec;
    const Index nx = l.nx;
    const Index nw = l.stage_size();
    Mat hess(l.n_v(), l.n_v());
    for (Index k = 0; k < l.intervals; ++k) {
      for (Index i = 0; i < nx; ++i) hess(l.state(k) + i, l.state(k) + i) = 2.0 * s.state_weight[i];
      for (Index i = 0; i < l.nu; ++i) hess(l.control(k) + i, l.control(k) + i) = 2.0 * s.control_weight[i];
    }
    for (Index i = 0; i < nx; ++i) hess(l.state(l.intervals) + i, l.state(l.intervals) + i) = 2.0 * s.terminal_weight[i];

    // −Σ_k ∇²_w (λ_{k+1}ᵀ Φ(w_k)) by central differences of Φ_wᵀ·λ_{k+1}.
    for (Index k = 0; k < l.intervals; ++k) {
      const Vec lam = lambda.segment((k + 1) * nx, nx);
      if (norm_inf(lam) == 0.0) continue;
      const Vec w = v.segment(l.state(k), nw);
      const double step = 1e-5 * (1.0 + norm_inf(w));
      Mat block(nw, nw);
      Vec vp = v;
      for (Index c = 0; c < nw; ++c) {
        Mat sp, sm;
        vp[l.state(k) + c] = w[c] + step;
        model->shoot(vp, k, &sp);
        vp[l.state(k) + c] = w[c] - step;
        model->shoot(vp, k, &sm);
        vp[l.state(k) + c] = w[c];
        block.set_col(c, (1.0 / (2.0 * step)) * (tmul(sp, lam) - tmul(sm, lam)));
      }
      hess.add_block(l.state(k), l.state(k), symmetrize(block), -1.0);
    }

    const Index first_ball = model->n_bounds();
    const Vec xn = l.x(v, l.intervals);
    for (std::size_t b = 0; b < s.terminal_balls.size(); ++b) {
      const double m = mu[first_ball + static_cast<Index>(b)];
      if (m == 0.0) continue;
      const TerminalBall& ball = s.terminal_balls[b];
      const double step = 1e-5 * (1.0 + norm_inf(xn));
      Mat block(nx, nx);
      Vec xp = xn;
      for (Index c = 0; c < nx; ++c) {
        xp[c] = xn[c] + step;
        const Vec gp = model->ball_gradient(ball, xp);
        xp[c] = xn[c] - step;
        const Vec gm = model->ball_gradient(ball, xp);
        xp[c] = xn[c];
        block.set_col(c, (1.0 / (2.0 * step)) * (gp - gm));
      }
      hess.add_block(l.state(l.intervals), l.state(l.intervals), symmetrize(block), m);
    }
    return hess;
  };

  OuterStructure outer;
  for (Index k = 0; k <= n_int; ++k) {
    const bool terminal = k == n_int;
    const Index width = terminal ? nx : nw;
    Vec weights(width);
    for (Index i = 0; i < nx; ++i) weights[i] = terminal ? spec.terminal_weight[i] : spec.state_weight[i];
    if (!terminal)
      for (Index i = 0; i < nu; ++i) weights[nx + i] = spec.control_weight[i];
    if (norm_inf(weights) == 0.0) continue;
    const Index offset = lay.state(k);
    const Index n_v = nlp.n_v;
    ConvexTerm term;
    term.inner = [offset, width, n_v](const Vec& v, Vec& value, Mat& jac) {
      value = v.segment(offset, width);
      jac = Mat(width, n_v);
      for (Index i = 0; i < width; ++i) jac(i, offset + i) = 1.0;
    };
    term.outer_hessian = [weights](const Vec&) { return 2.0 * Mat::diagonal(weights); };
    outer.objective.push_back(std::move(term));
  }
  for (std::size_t b = 0; b < spec.terminal_balls.size(); ++b) {
    const Index offset = lay.state(n_int);
    const Index n_v = nlp.n_v;
    ConvexTerm term;
    term.constraint_index = model->n_bounds() + static_cast<Index>(b);
    term.inner = [model, b, offset, n_v](const Vec& v, Vec& value, Mat& jac) {
      Mat jy;
      model->ball_eval(model->spec.terminal_balls[b], model->layout.x(v, model->layout.intervals), value, jy);
      jac = Mat(jy.rows(), n_v);
      jac.set_block(0, offset, jy);
    };
    term.outer_hessian = [](const Vec& y) { return 2.0 * Mat::identity(y.size()); };
    outer.constraints.push_back(std::move(term));
  }
  nlp.outer = std::move(outer);
  return nlp;
}

/// States linearly interpolated from x̄_0 to `final_state`, controls zero.
inline Vec interpolated_guess(const OcpSpec& spec, const Vec& final_state) {
  const OcpLayout l(spec);
  Vec v(l.n_v());
  for (Index k = 0; k <= l.intervals; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(l.intervals);
    v.set_segment(l.state(k), (1.0 - s) * spec.initial_state + s * final_state);
  }
  return v;
}

}  // namespace aasqp
