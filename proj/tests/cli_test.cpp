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

// End-to-end runs of the command-line tool.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

const fs::path kTool = AASQP_CLI_PATH;
const fs::path kProblems = AASQP_PROBLEMS_DIR;

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("aasqp_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(const std::string& args) {
  const std::string cmd = kTool.string() + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int csv_rows(const fs::path& p) {
  std::ifstream in(p);
  int n = -1;  // header
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::string pendulum() { return (kProblems / "pendulum.json").string(); }

TEST(CliSolve, AcceleratedScqpConverges) {
  const fs::path d = scratch("scqp");
  EXPECT_EQ(run("solve " + pendulum() + " --hessian scqp --aa --aa-threshold 1.0 --out " + d.string()), 0);
  EXPECT_GT(csv_rows(d / "pendulum.csv"), 10);
  EXPECT_TRUE(fs::exists(d / "pendulum.fixed_point.json"));
  EXPECT_TRUE(fs::exists(d / "convergence.svg"));
}

TEST(CliSolve, GaussNewtonHitsIterationLimit) {
  const fs::path d = scratch("ggn");
  EXPECT_EQ(run("solve " + pendulum() + " --hessian ggn --max-iter 100 --out " + d.string()), 2);
  EXPECT_EQ(csv_rows(d / "pendulum.csv"), 101);
  EXPECT_FALSE(fs::exists(d / "pendulum.fixed_point.json"));
}

TEST(CliSolve, LongOptionAliases) {
  const fs::path d = scratch("alias");
  EXPECT_EQ(run("solve " + pendulum() +
                " --hessian scqp --with-anderson-acceleration --anderson-activation-threshold 0.1 --aa-depth 5 --out " +
                d.string()),
            0);
}

TEST(CliSolve, UsageErrors) {
  EXPECT_EQ(run("solve /nonexistent/pendulum.json"), 64);
  EXPECT_EQ(run("solve " + pendulum() + " --hessian newton"), 64);
  EXPECT_EQ(run("solve " + pendulum() + " --aa-damping 1.5"), 64);
  EXPECT_EQ(run("solve " + pendulum() + " --frobnicate"), 64);
  EXPECT_EQ(run(""), 64);
  const fs::path d = scratch("badjson");
  std::ofstream(d / "bad.json") << "{\"dynamics\": \"furuta\", \"initial_state\": [0]}";
  EXPECT_EQ(run("solve " + (d / "bad.json").string() + " --out " + d.string()), 64);
  EXPECT_EQ(run("--help"), 0);
}

TEST(CliSolve, InfeasibleProblemIsHardError) {
  const fs::path d = scratch("infeasible");
  std::ofstream(d / "p.json") << R"({"dynamics": "linear_test", "intervals": 4, "initial_state": [1],
    "control_bounds": {"lower": [-0.5], "upper": [0.5]},
    "terminal_balls": [{"on_output": false, "center": [5], "radius": 0.1}]})";
  EXPECT_EQ(run("solve " + (d / "p.json").string() + " --out " + d.string()), 1);
}

TEST(CliConfig, FlagsOverrideFile) {
  const fs::path d = scratch("config");
  std::ofstream(d / "opts.toml") << "[solve]\nhessian = \"ggn\"\nmax-iter = 5\n";
  const std::string base = "--config " + (d / "opts.toml").string() + " solve " + pendulum() + " --out ";
  EXPECT_EQ(run(base + (d / "a").string()), 2);
  EXPECT_EQ(csv_rows(d / "a" / "pendulum.csv"), 6);
  EXPECT_EQ(run(base + (d / "b").string() + " --max-iter 7"), 2);
  EXPECT_EQ(csv_rows(d / "b" / "pendulum.csv"), 8);
  // SCQP converges where the file's GGN does not.
  EXPECT_EQ(run(base + (d / "c").string() + " --max-iter 200 --hessian scqp"), 0);
  const nlohmann::json fp = nlohmann::json::parse(slurp(d / "c" / "pendulum.fixed_point.json"));
  EXPECT_EQ(fp["config"]["hessian"], "scqp");
  EXPECT_EQ(fp["config"]["max_iter"], 200);
}

TEST(CliExperiment, UnknownNameIsUsageError) { EXPECT_EQ(run("experiment furuta"), 64); }

TEST(CliExperiment, SeedFixesRandomStart) {
  const fs::path d = scratch("seed");
  ASSERT_EQ(run("experiment aa_unit --seed 11 --out " + (d / "a").string()), 0);
  ASSERT_EQ(run("experiment aa_unit --seed 11 --out " + (d / "b").string()), 0);
  ASSERT_EQ(run("experiment aa_unit --seed 12 --out " + (d / "c").string()), 0);
  for (const char* f : {"plain.csv", "aa1.csv", "summary.json", "convergence.svg"})
    EXPECT_EQ(slurp(d / "a" / "aa_unit" / f), slurp(d / "b" / "aa_unit" / f)) << f;
  EXPECT_NE(slurp(d / "a" / "aa_unit" / "aa1.csv"), slurp(d / "c" / "aa_unit" / "aa1.csv"));
}

TEST(CliExperiment, ZeroOrderWritesTrajectories) {
  const fs::path d = scratch("zo");
  ASSERT_EQ(run("experiment zero_order --jobs 2 --out " + d.string()), 0);
  const fs::path e = d / "zero_order";
  EXPECT_EQ(csv_rows(e / "trajectories.csv"), 3 * 21);
  const nlohmann::json s = nlohmann::json::parse(slurp(e / "summary.json"));
  EXPECT_EQ(s["configs"].size(), 3u);
  EXPECT_EQ(s["measure"], "step");
}

TEST(CliAnalyze, MissingArtifacts) {
  EXPECT_EQ(run("analyze /nonexistent/dir"), 66);
  const fs::path d = scratch("empty");
  EXPECT_EQ(run("analyze " + d.string()), 66);
  // A fixed point without its run log.
  const fs::path s = scratch("orphan");
  ASSERT_EQ(run("solve " + pendulum() + " --hessian scqp --out " + s.string()), 0);
  fs::remove(s / "pendulum.csv");
  EXPECT_EQ(run("analyze " + s.string()), 66);
}

TEST(CliAnalyze, ScqpRatesAgree) {
  const fs::path d = scratch("analyze");
  ASSERT_EQ(run("solve " + pendulum() + " --hessian scqp --tol 1e-11 --out " + d.string()), 0);
  ASSERT_EQ(run("analyze " + d.string() + " --jobs 4"), 0);
  const nlohmann::json a = nlohmann::json::parse(slurp(d / "analysis.json"));
  ASSERT_EQ(a.size(), 1u);
  const nlohmann::json& j = a[0];
  EXPECT_NEAR(j["observed_rate"].get<double>(), j["predicted_kappa"].get<double>(), 0.05);
  EXPECT_NEAR(j["kappa_bound"].get<double>(), j["predicted_kappa"].get<double>(), 1e-3);
  EXPECT_TRUE(j["necessary_condition"].get<bool>());
  EXPECT_TRUE(j["theta_history"].is_array());
}

}  // namespace
