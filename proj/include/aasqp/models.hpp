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

// Built-in continuous-time models. Each model is written once, generic over the scalar type, and
// differentiated with forward-mode duals when wrapped into a `Dynamics`.

#pragma once

#include <cmath>

namespace aasqp {

/// Frictionless cart with a point-mass pole. State x = (p, v, θ, κ): cart position, cart velocity,
/// pole angle, angular velocity. Input F is the horizontal force on the cart.
///
/// θ = 0 is the upright (unstable) position and θ = π hangs down. The tip of the pole sits at
/// c(x) = (p − l·sin θ, l·cos θ). With θ measured this way gravity enters κ̇ as
/// +(M + m)·g·sin θ, so θ = π is a stable equilibrium of the unforced system.
struct CartPendulum {
  static constexpr int nx = 4;
  static constexpr int nu = 1;
  static constexpr int ny = 2;

  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double length = 0.8;
  double gravity = 9.81;

  template <class T>
  void rhs(const T* x, const T* u, T* xdot) const {
    using std::cos;
    using std::sin;
    const double big_m = cart_mass;
    const double m = pole_mass;
    const double l = length;
    const double g = gravity;
    const T s = sin(x[2]);
    const T c = cos(x[2]);
    const T omega2 = x[3] * x[3];
    const T den = (big_m + m) - m * c * c;
    xdot[0] = x[1];
    xdot[1] = (-m * l * s * omega2 + m * g * c * s + u[0]) / den;
    xdot[2] = x[3];
    xdot[3] = (-m * l * c * s * omega2 + u[0] * c + (big_m + m) * g * s) / (l * den);
  }

  /// Pole tip position.
  template <class T>
  void output(const T* x, T* y) const {
    using std::cos;
    using std::sin;
    y[0] = x[0] - length * sin(x[2]);
    y[1] = length * cos(x[2]);
  }
};

/// Scalar integrator ẋ = u with output y = x.
struct LinearTest {
  static constexpr int nx = 1;
  static constexpr int nu = 1;
  static constexpr int ny = 1;

  template <class T>
  void rhs(const T* /*x*/, const T* u, T* xdot) const {
    xdot[0] = u[0];
  }

  template <class T>
  void output(const T* x, T* y) const {
    y[0] = x[0];
  }
};

}  // namespace aasqp
