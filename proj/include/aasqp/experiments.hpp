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

// Canned studies on the cart pendulum and on a linear contraction.
//
// Every experiment writes into its own directory:
//   <config>.csv                per-iteration log (ConvergenceReport::write_csv)
//   <config>.fixed_point.json   problem, solver options and final iterate of converged runs
//   summary.json                iterations to 1e-1, 1e-4, 1e-6, 1e-8 per configuration
//   convergence.svg             residual against iteration on a log axis
// Runs are single-threaded and start from the same z₀, so the files are byte-identical across
// reruns and independent of the number of worker threads.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "aasqp/analysis.hpp"
#include "aasqp/anderson.hpp"
#include "aasqp/errors.hpp"
#include "aasqp/linalg.hpp"
#include "aasqp/nlp.hpp"
#include "aasqp/problem.hpp"
#include "aasqp/sqp.hpp"

namespace aasqp {

// ---------------------------------------------------------------------------------------------
// Problems

/// Swing-up: ½·1e-4·u² per stage, x̄₀ = (0, 0, π, 0), pole tip within 0.05 of (l, l) at T = 1 s,
/// N = 20, RK4. The guess interpolates the states to the upright pose reached by swinging
/// through θ = 2π, with the cart under the target.
inline OcpProblem swingup_problem() {
  OcpProblem p;
  OcpSpec& s = p.spec;
  s.dynamics = named_dynamics("cart_pendulum", p.pendulum);
  s.intervals = 20;
  s.horizon = 1.0;
  s.initial_state = Vec{0, 0, std::numbers::pi, 0};
  s.state_weight = Vec(4);
  s.control_weight = Vec{0.5e-4};
  s.terminal_weight = Vec(4);
  const double l = p.pendulum.length;
  s.terminal_balls.push_back({true, Vec{l, l}, 0.05});
  p.guess_final_state = Vec{l, 0, 2 * std::numbers::pi, 0};
  return p;
}

inline Nlp swingup_ocp() { return swingup_problem().build(); }

/// Stabilization from θ = 0.15π: weights 2·(1e3, 1e-2, 1e3, 1e-2) on (p, v, θ, κ), scaled by
/// T/N on the stages, R = 0.02 and −80 ≤ u ≤ 80. The guess is the origin trajectory.
inline OcpProblem stabilization_problem() {
  OcpProblem p;
  OcpSpec& s = p.spec;
  s.dynamics = named_dynamics("cart_pendulum", p.pendulum);
  s.intervals = 20;
  s.horizon = 1.0;
  s.initial_state = Vec{0, 0, 0.15 * std::numbers::pi, 0};
  const Vec q{2e3, 2e-2, 2e3, 2e-2};
  s.state_weight = (s.horizon / static_cast<double>(s.intervals)) * q;
  s.control_weight = Vec{0.02};
  s.terminal_weight = q;
  s.control_bounds = ControlBounds{Vec{-80.0}, Vec{80.0}};
  p.guess_final_state = Vec(4);
  return p;
}

inline Nlp stabilization_ocp() { return stabilization_problem().build(); }

// ---------------------------------------------------------------------------------------------
// Solver options as JSON

inline nlohmann::json to_json(const SqpConfig& c) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json("inf"); };
  nlohmann::json j;
  j["hessian"] = to_string(c.hessian.kind);
  j["gamma_lm"] = c.hessian.gamma_lm;
  j["eps_proj"] = c.hessian.eps_proj;
  j["zero_order"] = c.zero_order;
  if (c.frozen_point) j["frozen_point"] = detail::vec_json(*c.frozen_point);
  j["adjoint_correction"] = c.adjoint_correction;
  j["max_iter"] = c.max_iter;
  j["kkt_tol"] = c.kkt_tol;
  j["anderson"] = {{"enabled", c.anderson.enabled},
                   {"depth", c.anderson.m},
                   {"damping", c.anderson.beta},
                   {"threshold", num(c.anderson.threshold)},
                   {"collinearity_tol", c.anderson.collinearity_tol},
                   {"reset_on_activation", c.anderson.reset_on_activation},
                   {"reset_on_active_set_change", c.anderson.reset_on_active_set_change}};
  return j;
}

inline SqpConfig sqp_config_from_json(const nlohmann::json& j) {
  auto num = [](const nlohmann::json& x) {
    if (x.is_string() && x.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    return x.get<double>();
  };
  SqpConfig c;
  try {
    c.hessian.kind = parse_hessian_kind(j.value("hessian", std::string(to_string(c.hessian.kind))));
    c.hessian.gamma_lm = j.value("gamma_lm", c.hessian.gamma_lm);
    c.hessian.eps_proj = j.value("eps_proj", c.hessian.eps_proj);
    c.zero_order = j.value("zero_order", c.zero_order);
    if (j.contains("frozen_point")) c.frozen_point = detail::json_vec(j["frozen_point"], "frozen_point");
    c.adjoint_correction = j.value("adjoint_correction", c.adjoint_correction);
    c.max_iter = j.value("max_iter", c.max_iter);
    c.kkt_tol = j.value("kkt_tol", c.kkt_tol);
    if (j.contains("anderson")) {
      const nlohmann::json& a = j["anderson"];
      c.anderson.enabled = a.value("enabled", c.anderson.enabled);
      c.anderson.m = a.value("depth", c.anderson.m);
      c.anderson.beta = a.value("damping", c.anderson.beta);
      if (a.contains("threshold")) c.anderson.threshold = num(a["threshold"]);
      c.anderson.collinearity_tol = a.value("collinearity_tol", c.anderson.collinearity_tol);
      c.anderson.reset_on_activation = a.value("reset_on_activation", c.anderson.reset_on_activation);
      c.anderson.reset_on_active_set_change = a.value("reset_on_active_set_change", c.anderson.reset_on_active_set_change);
    }
  } catch (const nlohmann::json::exception& e) {
    throw SolverError(ErrorCode::Configuration, std::string("solver options: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------------------------
// Experiment runner

struct NamedConfig {
  std::string name;
  SqpConfig config;
};

struct ExperimentSpec {
  std::string name;
  OcpProblem problem;
  std::vector<NamedConfig> configs;
  ResidualKind measure = ResidualKind::Kkt;  // residual used by the table and the plot

  void validate() const {
    if (configs.empty()) throw SolverError(ErrorCode::Configuration, "experiment '" + name + "' has no configurations");
    std::set<std::string> seen;
    for (const NamedConfig& c : configs) {
      if (c.name.empty() || !seen.insert(c.name).second)
        throw SolverError(ErrorCode::Configuration, "configuration names must be unique and non-empty");
      c.config.validate();
    }
  }
};

struct ExperimentRun {
  std::string name;
  SqpConfig config;
  SolveResult result;
};

struct ExperimentResult {
  std::string name;
  OcpProblem problem;
  ResidualKind measure = ResidualKind::Kkt;
  std::vector<ExperimentRun> runs;

  const ExperimentRun& run(const std::string& config) const {
    for (const ExperimentRun& r : runs)
      if (r.name == config) return r;
    throw SolverError(ErrorCode::Configuration, "no run named '" + config + "'");
  }
};

inline const std::vector<double>& table_tolerances() {
  static const std::vector<double> tols = {1e-1, 1e-4, 1e-6, 1e-8};
  return tols;
}

/// Runs every configuration from the problem's initial guess. A run that throws is recorded as
/// failed and the others continue.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, int jobs = 1) {
  spec.validate();
  ExperimentResult out;
  out.name = spec.name;
  out.problem = spec.problem;
  out.measure = spec.measure;
  const Nlp nlp = spec.problem.build();
  const PrimalDualIterate z0 = spec.problem.initial_guess(nlp);
  out.runs.resize(spec.configs.size());
  auto one = [&](std::size_t i) {
    ExperimentRun& r = out.runs[i];
    r.name = spec.configs[i].name;
    r.config = spec.configs[i].config;
    try {
      r.result = solve(nlp, z0, r.config);
    } catch (const std::exception& e) {
      r.result.status = SolveStatus::Failed;
      r.result.z = z0;
      r.result.message = e.what();
    }
  };
  const std::size_t n = spec.configs.size();
  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) one(i);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += workers) one(i);
      });
    for (std::thread& t : pool) t.join();
  }
  return out;
}

inline const char* to_string(ResidualKind k) { return k == ResidualKind::Kkt ? "kkt" : "step"; }

inline nlohmann::json comparison_table(const ExperimentResult& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const ExperimentRun& run : r.runs) {
    nlohmann::json to;
    for (double tol : table_tolerances()) {
      char key[16];
      std::snprintf(key, sizeof key, "%.0e", tol);
      const int it = run.result.report.iterations_to(tol, r.measure);
      to[key] = it >= 0 ? nlohmann::json(it) : nlohmann::json(nullptr);
    }
    nlohmann::json row = {{"config", run.name},
                          {"status", to_string(run.result.status)},
                          {"iterations", run.result.report.rows.empty() ? 0 : run.result.report.rows.back().iter},
                          {"iterations_to", to}};
    if (!run.result.report.rows.empty()) {
      const IterationRecord& last = run.result.report.rows.back();
      row["final_kkt_inf"] = last.kkt_inf;
      row["final_step_inf"] = last.step_inf;
    }
    if (!run.result.message.empty()) row["message"] = run.result.message;
    rows.push_back(row);
  }
  return {{"experiment", r.name}, {"measure", to_string(r.measure)}, {"configs", rows}};
}

// ---------------------------------------------------------------------------------------------
// Plotting

struct Series {
  std::string name;
  std::vector<double> values;  // one residual per iteration, non-positive entries are skipped
};

/// Self-contained SVG with one polyline per series on a log₁₀ vertical axis.
inline std::string convergence_svg(const std::string& title, const std::vector<Series>& series,
                                   const std::string& y_label = "residual") {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  const double width = 720, height = 440, left = 70, right = 190, top = 40, bottom = 50;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t n_max = 1;
  for (const Series& s : series) {
    n_max = std::max(n_max, s.values.size());
    for (double v : s.values)
      if (v > 0.0 && std::isfinite(v)) {
        lo = std::min(lo, std::log10(v));
        hi = std::max(hi, std::log10(v));
      }
  }
  if (!std::isfinite(lo)) lo = -1, hi = 0;
  lo = std::floor(lo);
  hi = std::ceil(hi);
  if (hi <= lo) hi = lo + 1;
  const double x_span = static_cast<double>(std::max<std::size_t>(n_max - 1, 1));
  auto px = [&](double k) { return left + (width - left - right) * k / x_span; };
  auto py = [&](double l10) { return top + (height - top - bottom) * (hi - l10) / (hi - lo); };

  std::ostringstream os;
  char buf[256];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"24\" font-size=\"15\">" << title << "</text>\n";
  for (int d = static_cast<int>(lo); d <= static_cast<int>(hi); ++d) {
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\"/>"
                  "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">1e%d</text>\n",
                  left, py(d), width - right, py(d), left - 6, py(d) + 4, d);
    os << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"black\"/>\n", left, top,
                width - left - right, height - top - bottom);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">iteration</text>"
                "<text x=\"%.2f\" y=\"%.2f\">0</text><text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">%zu</text>\n",
                (left + width - right) / 2, height - 12, left, height - bottom + 16, width - right, height - bottom + 16,
                n_max - 1);
  os << buf;
  std::snprintf(buf, sizeof buf, "<text transform=\"translate(18,%.2f) rotate(-90)\" text-anchor=\"middle\">",
                (top + height - bottom) / 2);
  os << buf << y_label << "</text>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = colors[i % (sizeof colors / sizeof *colors)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t k = 0; k < series[i].values.size(); ++k) {
      const double v = series[i].values[k];
      if (!(v > 0.0) || !std::isfinite(v)) continue;
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", first ? "" : " ", px(static_cast<double>(k)), py(std::log10(v)));
      os << buf;
      first = false;
    }
    os << "\"/>\n";
    const double ly = top + 10 + 18 * static_cast<double>(i);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" stroke-width=\"2\"/>"
                  "<text x=\"%.2f\" y=\"%.2f\">",
                  width - right + 10, ly, width - right + 30, ly, color, width - right + 36, ly + 4);
    os << buf << series[i].name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------------------------
// Artifacts

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SolverError(ErrorCode::Configuration, "cannot write '" + path.string() + "'");
  out << text;
}

inline nlohmann::json iterate_json(const PrimalDualIterate& z) {
  return {{"v", vec_json(z.v)}, {"lambda", vec_json(z.lambda)}, {"mu", vec_json(z.mu)}};
}

}  // namespace detail

/// Writes the per-run CSVs, fixed points of converged runs, summary.json and convergence.svg.
inline void write_experiment(const ExperimentResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<Series> series;
  for (const ExperimentRun& run : r.runs) {
    std::ostringstream csv;
    run.result.report.write_csv(csv);
    detail::write_text(dir / (run.name + ".csv"), csv.str());
    if (run.result.status == SolveStatus::Converged) {
      const nlohmann::json fp = {{"experiment", r.name},
                                 {"config_name", run.name},
                                 {"measure", to_string(r.measure)},
                                 {"problem", to_json(r.problem)},
                                 {"config", to_json(run.config)},
                                 {"z", detail::iterate_json(run.result.z)}};
      detail::write_text(dir / (run.name + ".fixed_point.json"), fp.dump(2) + "\n");
    }
    Series s{run.name, {}};
    for (const IterationRecord& row : run.result.report.rows)
      s.values.push_back(r.measure == ResidualKind::Kkt ? row.kkt_inf : row.step_inf);
    series.push_back(std::move(s));
  }
  detail::write_text(dir / "summary.json", comparison_table(r).dump(2) + "\n");
  detail::write_text(dir / "convergence.svg",
                     convergence_svg(r.name, series, r.measure == ResidualKind::Kkt ? "KKT residual (inf-norm)"
                                                                                     : "step norm (inf-norm)"));
}

// ---------------------------------------------------------------------------------------------
// Named studies

namespace detail {

inline SqpConfig pendulum_config(HessianKind kind, int max_iter) {
  SqpConfig c;
  c.hessian.kind = kind;
  c.max_iter = max_iter;
  c.kkt_tol = 1e-10;
  return c;
}

inline SqpConfig with_anderson(SqpConfig c, int depth, double threshold) {
  c.anderson.enabled = true;
  c.anderson.m = depth;
  c.anderson.threshold = threshold;
  return c;
}

}  // namespace detail

/// Activation threshold of the accelerated SCQP runs on the swing-up.
inline constexpr double kSwingupThreshold = 0.1;

/// Exact Hessian with projection, GGN, SCQP and AA(m)-SCQP for m ∈ {1, 5, 10}, plus AA(1)-SCQP
/// accelerating from the first iteration for comparison.
inline ExperimentSpec scqp_pendulum_experiment() {
  using detail::pendulum_config;
  using detail::with_anderson;
  ExperimentSpec e;
  e.name = "scqp_pendulum";
  e.problem = swingup_problem();
  const SqpConfig scqp = pendulum_config(HessianKind::SCQP, 200);
  e.configs = {{"exact_project", pendulum_config(HessianKind::ExactProject, 1000)},
               {"ggn", pendulum_config(HessianKind::GGN, 200)},
               {"scqp", scqp},
               {"aa1_scqp", with_anderson(scqp, 1, kSwingupThreshold)},
               {"aa5_scqp", with_anderson(scqp, 5, kSwingupThreshold)},
               {"aa10_scqp", with_anderson(scqp, 10, kSwingupThreshold)},
               {"aa1_scqp_from_start", with_anderson(scqp, 1, std::numeric_limits<double>::infinity())}};
  return e;
}

/// Activation thresholds 1e2, 1, 1e-2 for AA(1) on the exact Hessian with projection.
inline ExperimentSpec threshold_study_experiment() {
  using detail::pendulum_config;
  using detail::with_anderson;
  ExperimentSpec e;
  e.name = "threshold_study";
  e.problem = swingup_problem();
  const SqpConfig base = pendulum_config(HessianKind::ExactProject, 1000);
  e.configs = {{"exact_project", base},
               {"aa1_delta_1e2", with_anderson(base, 1, 1e2)},
               {"aa1_delta_1e0", with_anderson(base, 1, 1e0)},
               {"aa1_delta_1e-2", with_anderson(base, 1, 1e-2)}};
  return e;
}

/// Stabilization with frozen dynamics Jacobians (at the origin trajectory), with and without
/// AA(1), and the exact-Jacobian GGN run whose solution the zero-order fixed point is compared to.
/// Zero-order runs stop on the step norm, so the table uses it for every configuration.
inline ExperimentSpec zero_order_experiment() {
  ExperimentSpec e;
  e.name = "zero_order";
  e.problem = stabilization_problem();
  e.measure = ResidualKind::Step;
  SqpConfig exact = detail::pendulum_config(HessianKind::GGN, 300);
  SqpConfig zo = exact;
  zo.zero_order = true;
  // The KKT residual stalls at a zero-order fixed point, so AA must not wait for it.
  e.configs = {{"exact_ggn", exact},
               {"zero_order", zo},
               {"aa1_zero_order", detail::with_anderson(zo, 1, std::numeric_limits<double>::infinity())}};
  return e;
}

/// Long-format state and control trajectories of every run: k,t,config,p,v,theta,kappa,u.
inline std::string trajectories_csv(const ExperimentResult& r) {
  const OcpLayout l(r.problem.spec);
  if (l.nx != 4 || l.nu != 1) throw SolverError(ErrorCode::Configuration, "trajectory CSV expects the cart pendulum");
  std::ostringstream os;
  os << "k,t,config,p,v,theta,kappa,u\n";
  char buf[256];
  for (const ExperimentRun& run : r.runs) {
    const Vec& v = run.result.z.v;
    if (v.size() != l.n_v()) continue;
    for (Index k = 0; k <= l.intervals; ++k) {
      const Index xs = l.state(k);
      const double u = k < l.intervals ? v[l.control(k)] : std::numeric_limits<double>::quiet_NaN();
      std::snprintf(buf, sizeof buf, "%ld,%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", static_cast<long>(k),
                    r.problem.spec.horizon * static_cast<double>(k) / static_cast<double>(l.intervals),
                    run.name.c_str(), v[xs], v[xs + 1], v[xs + 2], v[xs + 3], u);
      os << buf;
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------------------------
// Linear contraction study

struct FixedPointLog {
  std::vector<double> residual;  // ‖φ(z_k) − z_k‖₂
  std::vector<double> theta;
  std::vector<char> accelerated;
  Vec z;
};

/// `iterations` steps of z ↦ φ(z), optionally through AA.
template <class Map>
FixedPointLog iterate_fixed_point(const Map& phi, Vec z, int iterations, const AndersonConfig& config) {
  FixedPointLog log;
  AndersonState state;
  for (int k = 0; k <= iterations; ++k) {
    const Vec fz = phi(z);
    log.residual.push_back(norm2(fz - z));
    log.theta.push_back(state.accelerated ? state.theta : std::numeric_limits<double>::quiet_NaN());
    log.accelerated.push_back(state.accelerated ? 1 : 0);
    if (k == iterations || log.residual.back() == 0.0) break;
    z = aa_step(state, z, fz, config);
  }
  log.z = std::move(z);
  return log;
}

struct AaUnitStudy {
  Mat a;
  Vec b;
  Vec z0;
  int iterations = 30;
  std::vector<std::pair<std::string, FixedPointLog>> runs;  // plain, aa1, aa2, aa3
};

/// φ(z) = A·z + b with A = diag(0.9, 0.5, 0.1), b = (1, 1, 1), starting from z₀ (the origin by
/// default).
inline AaUnitStudy run_aa_unit(int iterations = 30, std::optional<Vec> z0 = std::nullopt) {
  AaUnitStudy s;
  s.a = Mat::diagonal(Vec{0.9, 0.5, 0.1});
  s.b = Vec{1, 1, 1};
  s.z0 = z0.value_or(Vec(3));
  if (s.z0.size() != 3) throw SolverError(ErrorCode::DimensionMismatch, "aa_unit start point");
  s.iterations = iterations;
  const Mat a = s.a;
  const Vec b = s.b;
  auto phi = [&](const Vec& z) { return a * z + b; };
  AndersonConfig plain;
  s.runs.emplace_back("plain", iterate_fixed_point(phi, s.z0, iterations, plain));
  for (int m = 1; m <= 3; ++m) {
    AndersonConfig c;
    c.enabled = true;
    c.m = m;
    s.runs.emplace_back("aa" + std::to_string(m), iterate_fixed_point(phi, s.z0, iterations, c));
  }
  return s;
}

inline const FixedPointLog& find_run(const AaUnitStudy& s, const std::string& name) {
  for (const auto& [n, log] : s.runs)
    if (n == name) return log;
  throw SolverError(ErrorCode::Configuration, "no run named '" + name + "'");
}

inline void write_aa_unit(const AaUnitStudy& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<Series> series;
  nlohmann::json rows = nlohmann::json::array();
  char buf[128];
  for (const auto& [name, log] : s.runs) {
    std::ostringstream csv;
    csv << "iter,residual,theta_k,aa_active\n";
    for (std::size_t k = 0; k < log.residual.size(); ++k) {
      if (std::isnan(log.theta[k]))
        std::snprintf(buf, sizeof buf, "%zu,%.17g,nan,%d\n", k, log.residual[k], log.accelerated[k]);
      else
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%d\n", k, log.residual[k], log.theta[k], log.accelerated[k]);
      csv << buf;
    }
    detail::write_text(dir / (name + ".csv"), csv.str());
    nlohmann::json at;
    for (int k : {5, 10, 20, 30})
      if (static_cast<std::size_t>(k) < log.residual.size()) at[std::to_string(k)] = log.residual[static_cast<std::size_t>(k)];
    rows.push_back({{"config", name}, {"residual_at", at}});
    series.push_back({name, log.residual});
  }
  const double ratio = find_run(s, "aa1").residual.at(10) / find_run(s, "plain").residual.at(10);
  const nlohmann::json summary = {{"experiment", "aa_unit"},
                                  {"map", "z -> diag(0.9, 0.5, 0.1) z + (1, 1, 1)"},
                                  {"z0", detail::vec_json(s.z0)},
                                  {"configs", rows},
                                  {"aa1_over_plain_at_10", ratio}};
  detail::write_text(dir / "summary.json", summary.dump(2) + "\n");
  detail::write_text(dir / "convergence.svg", convergence_svg("aa_unit", series, "residual (2-norm)"));
}

// ---------------------------------------------------------------------------------------------
// Analysis of a stored fixed point

struct FixedPointArtifact {
  std::string config_name;
  OcpProblem problem;
  SqpConfig config;
  ResidualKind measure = ResidualKind::Kkt;
  PrimalDualIterate z;
};

inline FixedPointArtifact load_fixed_point(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SolverError(ErrorCode::Configuration, "cannot open '" + path.string() + "'");
  FixedPointArtifact a;
  try {
    nlohmann::json j;
    in >> j;
    a.config_name = j.at("config_name").get<std::string>();
    a.problem = ocp_problem_from_json(j.at("problem"));
    a.config = sqp_config_from_json(j.at("config"));
    a.measure = j.at("measure").get<std::string>() == "step" ? ResidualKind::Step : ResidualKind::Kkt;
    const nlohmann::json& z = j.at("z");
    a.z.v = detail::json_vec(z.at("v"), "v");
    a.z.lambda = detail::json_vec(z.at("lambda"), "lambda");
    a.z.mu = detail::json_vec(z.at("mu"), "mu");
  } catch (const nlohmann::json::exception& e) {
    throw SolverError(ErrorCode::Configuration, path.string() + ": " + e.what());
  }
  return a;
}

/// Observed tail rate against ρ(A★), and for exact-derivative runs the reduced-matrix bound and
/// the necessary condition. Parts that cannot be evaluated are reported as null with a reason.
inline nlohmann::json analyze_fixed_point(const FixedPointArtifact& a, const ConvergenceReport& report, int jobs = 1) {
  const Nlp nlp = a.problem.build();
  nlohmann::json out;
  out["config"] = a.config_name;
  RateEstimate rate;
  double kappa_bound = std::numeric_limits<double>::quiet_NaN();
  try {
    rate = observed_rate(report, 0.4, a.measure);
  } catch (const SolverError& e) {
    rate.observed_rate = std::numeric_limits<double>::quiet_NaN();
    out["rate_error"] = e.what();
  }
  SqpConfig plain = a.config;
  plain.anderson.enabled = false;
  try {
    const IterationMatrix am = estimate_iteration_matrix(nlp, a.z, plain, std::nullopt, jobs);
    rate.set_prediction(spectral_radius(am.a));
  } catch (const SolverError& e) {
    out["iteration_matrix_error"] = e.what();
  }
  if (!plain.zero_order) {
    try {
      const ReducedMatrices red = reduced_matrices(nlp, a.z, plain);
      kappa_bound = kappa_bound_symmetric(red.w_hat, red.lambda_hat);
      out["necessary_condition"] = necessary_condition_holds(red.w_hat, red.lambda_hat);
    } catch (const SolverError& e) {
      out["kappa_bound_error"] = e.what();
    }
  }
  out.update(analysis_summary(rate, kappa_bound, report));
  out["agreement"] = std::isfinite(rate.agreement) ? nlohmann::json(rate.agreement) : nlohmann::json(nullptr);
  out["tail_start"] = rate.tail_start;
  return out;
}

}  // namespace aasqp
