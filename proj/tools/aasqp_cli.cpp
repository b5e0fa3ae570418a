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

// aasqp command-line tool.
//
//   aasqp solve <problem.json> [solver flags] [--out DIR]
//   aasqp experiment <scqp_pendulum|zero_order|aa_unit|threshold_study> [--out DIR] [--jobs J] [--seed S]
//   aasqp analyze <dir> [--jobs J]
//
// Every option can also come from a TOML/INI file given with --config; command-line values win.
// Exit codes: 0 success (converged), 2 iteration limit, 1 solver error, 64 usage, 66 missing input.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aasqp/experiments.hpp"

namespace fs = std::filesystem;
using namespace aasqp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxIter = 2;
constexpr int kExitUsage = 64;
constexpr int kExitNoInput = 66;

struct SolverFlags {
  std::string hessian = "exact+project";
  bool zero_order = false;
  bool adjoint_correction = false;
  bool aa = false;
  int aa_depth = 1;
  double aa_damping = 1.0;
  double aa_threshold = std::numeric_limits<double>::infinity();
  double tol = 1e-8;
  int max_iter = 200;

  SqpConfig config() const {
    SqpConfig c;
    c.hessian.kind = parse_hessian_kind(hessian);
    c.zero_order = zero_order;
    c.adjoint_correction = adjoint_correction;
    c.anderson.enabled = aa;
    c.anderson.m = aa_depth;
    c.anderson.beta = aa_damping;
    c.anderson.threshold = aa_threshold;
    c.kkt_tol = tol;
    c.max_iter = max_iter;
    c.validate();
    return c;
  }
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f) {
  cmd->add_option("--hessian", f.hessian, "Hessian strategy")
      ->check(CLI::IsMember({"exact+project", "exact+lm", "ggn", "scqp"}))
      ->capture_default_str();
  cmd->add_flag("--zero-order", f.zero_order, "freeze the dynamics Jacobians at the origin");
  cmd->add_flag("--adjoint-correction", f.adjoint_correction, "use exact adjoints in the QP gradient");
  cmd->add_flag("--aa,--with-anderson-acceleration", f.aa, "enable Anderson acceleration");
  cmd->add_option("--aa-depth", f.aa_depth, "AA memory m")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--aa-damping", f.aa_damping, "AA damping beta in (0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  cmd->add_option("--aa-threshold,--anderson-activation-threshold", f.aa_threshold,
                  "KKT level below which AA steps are taken");
  cmd->add_option("--tol", f.tol, "termination tolerance")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--max-iter", f.max_iter, "iteration limit")->check(CLI::PositiveNumber)->capture_default_str();
}

std::string format_g(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw SolverError(ErrorCode::Configuration, "cannot write '" + p.string() + "'");
  out << text;
}

void print_table(const nlohmann::json& table) {
  std::printf("%-22s %-17s %6s %7s %7s %7s %7s\n", "config", "status", "iters", "1e-1", "1e-4", "1e-6", "1e-8");
  for (const nlohmann::json& row : table["configs"]) {
    std::printf("%-22s %-17s %6d", row["config"].get<std::string>().c_str(), row["status"].get<std::string>().c_str(),
                row["iterations"].get<int>());
    for (const char* key : {"1e-01", "1e-04", "1e-06", "1e-08"}) {
      const nlohmann::json& v = row["iterations_to"][key];
      if (v.is_null())
        std::printf(" %7s", "-");
      else
        std::printf(" %7d", v.get<int>());
    }
    std::printf("\n");
  }
}

int cmd_solve(const std::string& problem_file, const SolverFlags& flags, const std::string& out_dir) {
  OcpProblem problem;
  SqpConfig config;
  try {
    problem = load_ocp_problem(problem_file);
    config = flags.config();
  } catch (const SolverError& e) {
    std::cerr << "aasqp: " << e.what() << "\n";
    return kExitUsage;
  }
  const Nlp nlp = problem.build();
  const SolveResult r = solve(nlp, problem.initial_guess(nlp), config);

  const ExperimentRun run{fs::path(problem_file).stem().string(), config, r};
  ExperimentResult er;
  er.name = "solve";
  er.problem = problem;
  er.measure = config.zero_order ? ResidualKind::Step : ResidualKind::Kkt;
  er.runs.push_back(run);
  write_experiment(er, out_dir);

  const IterationRecord last = r.report.rows.empty() ? IterationRecord{} : r.report.rows.back();
  std::printf("status %s\niterations %d\nkkt_inf %s\nstep_inf %s\ncsv %s\n", to_string(r.status), last.iter,
              format_g(last.kkt_inf).c_str(), format_g(last.step_inf).c_str(),
              (fs::path(out_dir) / (run.name + ".csv")).string().c_str());
  if (r.status == SolveStatus::Failed) {
    std::cerr << "aasqp: " << r.message << "\n";
    return kExitError;
  }
  return r.status == SolveStatus::Converged ? kExitOk : kExitMaxIter;
}

int cmd_experiment(const std::string& name, const std::string& out_dir, int jobs, std::optional<std::uint64_t> seed) {
  const fs::path dir = fs::path(out_dir) / name;
  if (name == "aa_unit") {
    AaUnitStudy s = run_aa_unit();
    if (seed) {
      // Seeded studies start from a random point instead of the origin.
      std::mt19937_64 rng(*seed);
      std::normal_distribution<double> nd;
      s = run_aa_unit(s.iterations, Vec{nd(rng), nd(rng), nd(rng)});
    }
    write_aa_unit(s, dir);
    std::printf("%-8s %14s %14s %14s\n", "config", "r_5", "r_10", "r_20");
    for (const auto& [n, log] : s.runs) {
      std::printf("%-8s", n.c_str());
      // Deep memories can solve the three-dimensional map exactly and stop early.
      for (std::size_t k : {5, 10, 20}) {
        if (k < log.residual.size())
          std::printf(" %14.6e", log.residual[k]);
        else
          std::printf(" %14s", "-");
      }
      std::printf("\n");
    }
    std::printf("written %s\n", dir.string().c_str());
    return kExitOk;
  }
  ExperimentSpec spec;
  if (name == "scqp_pendulum") {
    spec = scqp_pendulum_experiment();
  } else if (name == "zero_order") {
    spec = zero_order_experiment();
  } else if (name == "threshold_study") {
    spec = threshold_study_experiment();
  } else {
    std::cerr << "aasqp: unknown experiment '" << name << "'\n";
    return kExitUsage;
  }
  const ExperimentResult r = run_experiment(spec, jobs);
  write_experiment(r, dir);
  if (name == "zero_order") write_file(dir / "trajectories.csv", trajectories_csv(r));
  print_table(comparison_table(r));
  std::printf("written %s\n", dir.string().c_str());
  return kExitOk;
}

int cmd_analyze(const std::string& dir, int jobs) {
  if (!fs::is_directory(dir)) {
    std::cerr << "aasqp: no such directory '" << dir << "'\n";
    return kExitNoInput;
  }
  std::vector<fs::path> points;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    const std::string f = e.path().filename().string();
    const std::string suffix = ".fixed_point.json";
    if (f.size() > suffix.size() && f.compare(f.size() - suffix.size(), suffix.size(), suffix) == 0)
      points.push_back(e.path());
  }
  std::sort(points.begin(), points.end());
  if (points.empty()) {
    std::cerr << "aasqp: no fixed points in '" << dir << "'\n";
    return kExitNoInput;
  }
  nlohmann::json out = nlohmann::json::array();
  for (const fs::path& p : points) {
    const FixedPointArtifact a = load_fixed_point(p);
    const fs::path csv = p.parent_path() / (a.config_name + ".csv");
    std::ifstream in(csv);
    if (!in) {
      std::cerr << "aasqp: missing run log '" << csv.string() << "'\n";
      return kExitNoInput;
    }
    const nlohmann::json j = analyze_fixed_point(a, ConvergenceReport::read_csv(in), jobs);
    auto show = [&](const char* key) { return j.contains(key) && j[key].is_number() ? format_g(j[key].get<double>()) : "-"; };
    std::printf("%-22s observed %-10s rho(A) %-10s kappa_bound %-10s necessary %s\n", a.config_name.c_str(),
                show("observed_rate").c_str(), show("predicted_kappa").c_str(), show("kappa_bound").c_str(),
                j.contains("necessary_condition") ? (j["necessary_condition"].get<bool>() ? "yes" : "no") : "-");
    out.push_back(j);
  }
  write_file(fs::path(dir) / "analysis.json", out.dump(2) + "\n");
  std::printf("written %s\n", (fs::path(dir) / "analysis.json").string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anderson-accelerated SQP for optimal control"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML or INI file with option values; flags override it");
  app.option_defaults()->always_capture_default();

  std::string out_dir = "out";
  int jobs = 1;
  std::optional<std::uint64_t> seed;

  SolverFlags solver;
  std::string problem_file;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve an OCP described in a JSON file");
  solve_cmd->add_option("problem", problem_file, "problem JSON")->required()->check(CLI::ExistingFile);
  add_solver_flags(solve_cmd, solver);
  solve_cmd->add_option("--out", out_dir, "output directory");

  std::string experiment;
  CLI::App* exp_cmd = app.add_subcommand("experiment", "run a canned study");
  exp_cmd->add_option("name", experiment, "scqp_pendulum, zero_order, aa_unit or threshold_study")->required();
  exp_cmd->add_option("--out", out_dir, "output root");
  exp_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--seed", seed, "seed for randomized problem data");

  std::string analyze_dir;
  CLI::App* an_cmd = app.add_subcommand("analyze", "rate analysis of stored fixed points");
  an_cmd->add_option("dir", analyze_dir, "directory written by solve or experiment")->required();
  an_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*solve_cmd) return cmd_solve(problem_file, solver, out_dir);
    if (*exp_cmd) return cmd_experiment(experiment, out_dir, jobs, seed);
    return cmd_analyze(analyze_dir, jobs);
  } catch (const SolverError& e) {
    std::cerr << "aasqp: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "aasqp: " << e.what() << "\n";
    return kExitError;
  }
}
