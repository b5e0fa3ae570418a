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

// JSON description of an optimal control problem for the command-line tool.
//
//   {
//     "dynamics": "cart_pendulum" | "linear_test",
//     "parameters": {"cart_mass": 1.0, "pole_mass": 0.1, "length": 0.8, "gravity": 9.81},
//     "intervals": 20, "horizon": 1.0,
//     "integrator": "rk4" | "euler", "steps_per_interval": 1,
//     "initial_state": [...],
//     "state_weight": [...], "control_weight": [...], "terminal_weight": [...],
//     "control_bounds": {"lower": [...], "upper": [...]},
//     "terminal_balls": [{"on_output": true, "center": [...], "radius": 0.05}],
//     "guess_final_state": [...]
//   }
//
// "parameters" is only read for the cart pendulum. Omitted weights default to zero, and the
// initial guess interpolates the states from initial_state to guess_final_state (to
// initial_state itself when absent).

#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aasqp/errors.hpp"
#include "aasqp/linalg.hpp"
#include "aasqp/models.hpp"
#include "aasqp/nlp.hpp"
#include "aasqp/ocp.hpp"

namespace aasqp {

struct OcpProblem {
  OcpSpec spec;
  Integrator integrator = Integrator::Rk4;
  int steps_per_interval = 1;
  Vec guess_final_state;
  CartPendulum pendulum;  // parameters when spec.dynamics is the cart pendulum

  Nlp build() const { return build_ocp_nlp(spec, integrator, steps_per_interval); }

  PrimalDualIterate initial_guess(const Nlp& nlp) const {
    PrimalDualIterate z = PrimalDualIterate::zeros(nlp);
    z.v = interpolated_guess(spec, guess_final_state.size() > 0 ? guess_final_state : spec.initial_state);
    return z;
  }
};

namespace detail {

inline Vec json_vec(const nlohmann::json& j, const char* key) {
  if (!j.is_array()) throw SolverError(ErrorCode::Configuration, std::string("'") + key + "' must be an array");
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw SolverError(ErrorCode::Configuration, std::string("'") + key + "' must hold numbers");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline nlohmann::json vec_json(const Vec& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

}  // namespace detail

inline Dynamics named_dynamics(const std::string& name, const CartPendulum& params = {}) {
  if (name == "cart_pendulum") return make_dynamics(name, params);
  if (name == "linear_test") return make_dynamics(name, LinearTest{});
  throw SolverError(ErrorCode::Configuration, "unknown dynamics '" + name + "'");
}

namespace detail {

inline OcpProblem parse_problem(const nlohmann::json& j) {
  if (!j.is_object()) throw SolverError(ErrorCode::Configuration, "problem must be a JSON object");
  static const std::vector<std::string> known = {"dynamics",        "parameters",     "intervals",       "horizon",
                                                 "integrator",      "steps_per_interval", "initial_state", "state_weight",
                                                 "control_weight",  "terminal_weight", "control_bounds", "terminal_balls",
                                                 "guess_final_state"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw SolverError(ErrorCode::Configuration, "unknown problem key '" + it.key() + "'");
  if (!j.contains("dynamics") || !j["dynamics"].is_string())
    throw SolverError(ErrorCode::Configuration, "'dynamics' is required");

  OcpProblem p;
  const std::string name = j["dynamics"].get<std::string>();
  if (j.contains("parameters")) {
    const nlohmann::json& q = j["parameters"];
    p.pendulum.cart_mass = q.value("cart_mass", p.pendulum.cart_mass);
    p.pendulum.pole_mass = q.value("pole_mass", p.pendulum.pole_mass);
    p.pendulum.length = q.value("length", p.pendulum.length);
    p.pendulum.gravity = q.value("gravity", p.pendulum.gravity);
    if (!(p.pendulum.length > 0.0)) throw SolverError(ErrorCode::Configuration, "pendulum length must be positive");
  }
  OcpSpec& s = p.spec;
  s.dynamics = named_dynamics(name, p.pendulum);
  const Index nx = s.dynamics.nx;
  const Index nu = s.dynamics.nu;
  s.intervals = j.value("intervals", Index{20});
  s.horizon = j.value("horizon", 1.0);
  const std::string integ = j.value("integrator", std::string("rk4"));
  if (integ == "rk4") {
    p.integrator = Integrator::Rk4;
  } else if (integ == "euler") {
    p.integrator = Integrator::ExplicitEuler;
  } else {
    throw SolverError(ErrorCode::Configuration, "unknown integrator '" + integ + "'");
  }
  p.steps_per_interval = j.value("steps_per_interval", 1);
  if (p.steps_per_interval < 1) throw SolverError(ErrorCode::Configuration, "steps_per_interval must be >= 1");
  if (!j.contains("initial_state")) throw SolverError(ErrorCode::Configuration, "'initial_state' is required");
  s.initial_state = json_vec(j["initial_state"], "initial_state");
  s.state_weight = j.contains("state_weight") ? json_vec(j["state_weight"], "state_weight") : Vec(nx);
  s.control_weight = j.contains("control_weight") ? json_vec(j["control_weight"], "control_weight") : Vec(nu);
  s.terminal_weight = j.contains("terminal_weight") ? json_vec(j["terminal_weight"], "terminal_weight") : Vec(nx);
  if (j.contains("control_bounds")) {
    const nlohmann::json& b = j["control_bounds"];
    if (!b.contains("lower") || !b.contains("upper"))
      throw SolverError(ErrorCode::Configuration, "control_bounds needs 'lower' and 'upper'");
    s.control_bounds = ControlBounds{json_vec(b["lower"], "lower"), json_vec(b["upper"], "upper")};
  }
  if (j.contains("terminal_balls")) {
    if (!j["terminal_balls"].is_array()) throw SolverError(ErrorCode::Configuration, "'terminal_balls' must be an array");
    for (const nlohmann::json& b : j["terminal_balls"]) {
      if (!b.contains("center") || !b.contains("radius"))
        throw SolverError(ErrorCode::Configuration, "terminal ball needs 'center' and 'radius'");
      s.terminal_balls.push_back({b.value("on_output", true), json_vec(b["center"], "center"), b["radius"].get<double>()});
    }
  }
  if (j.contains("guess_final_state")) {
    p.guess_final_state = json_vec(j["guess_final_state"], "guess_final_state");
    if (p.guess_final_state.size() != nx) throw SolverError(ErrorCode::DimensionMismatch, "guess_final_state");
  }
  s.validate();
  return p;
}

}  // namespace detail

/// Throws Configuration on schema errors and DimensionMismatch on inconsistent sizes.
inline OcpProblem ocp_problem_from_json(const nlohmann::json& j) {
  try {
    return detail::parse_problem(j);
  } catch (const nlohmann::json::exception& e) {
    throw SolverError(ErrorCode::Configuration, std::string("problem: ") + e.what());
  }
}

inline nlohmann::json to_json(const OcpProblem& p) {
  using detail::vec_json;
  const OcpSpec& s = p.spec;
  nlohmann::json j;
  j["dynamics"] = s.dynamics.name;
  if (s.dynamics.name == "cart_pendulum")
    j["parameters"] = {{"cart_mass", p.pendulum.cart_mass},
                       {"pole_mass", p.pendulum.pole_mass},
                       {"length", p.pendulum.length},
                       {"gravity", p.pendulum.gravity}};
  j["intervals"] = s.intervals;
  j["horizon"] = s.horizon;
  j["integrator"] = to_string(p.integrator);
  j["steps_per_interval"] = p.steps_per_interval;
  j["initial_state"] = vec_json(s.initial_state);
  j["state_weight"] = vec_json(s.state_weight);
  j["control_weight"] = vec_json(s.control_weight);
  j["terminal_weight"] = vec_json(s.terminal_weight);
  if (s.control_bounds) j["control_bounds"] = {{"lower", vec_json(s.control_bounds->lower)}, {"upper", vec_json(s.control_bounds->upper)}};
  if (!s.terminal_balls.empty()) {
    j["terminal_balls"] = nlohmann::json::array();
    for (const TerminalBall& b : s.terminal_balls)
      j["terminal_balls"].push_back({{"on_output", b.on_output}, {"center", vec_json(b.center)}, {"radius", b.radius}});
  }
  if (p.guess_final_state.size() > 0) j["guess_final_state"] = vec_json(p.guess_final_state);
  return j;
}

/// Throws Configuration when the file cannot be read or parsed.
inline OcpProblem load_ocp_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SolverError(ErrorCode::Configuration, "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SolverError(ErrorCode::Configuration, path + ": " + e.what());
  }
  return ocp_problem_from_json(j);
}

}  // namespace aasqp
