// Copyright 2026 The Groupfill Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string data(const std::string& name) { return std::string(GROUPFILL_DATA_DIR) + "/" + name; }

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("groupfill_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string& args, const std::string& env = "") {
    const fs::path out = dir_ / "stdout.txt";
    const fs::path err = dir_ / "stderr.txt";
    const std::string cmd = env + " '" GROUPFILL_CLI "' " + args + " >'" + out.string() + "' 2>'" +
                            err.string() + "'";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
  }

  static std::string value_of(const std::string& text, const std::string& key) {
    const auto pos = text.find("\n" + key + ": ");
    if (pos == std::string::npos) return {};
    const auto start = pos + key.size() + 3;
    return text.substr(start, text.find('\n', start) - start);
  }

  fs::path dir_;
};

TEST_F(Cli, SolveFixedHandProblem) {
  const CliResult r = run("solve-fixed " + data("hand_2x2.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("# groupfill solve-fixed file=", 0), 0u);
  EXPECT_NEAR(std::stod(value_of(r.out, "mu")), 0.4, 1e-9);
  EXPECT_NEAR(std::stod(value_of(r.out, "capacity_nats")), std::log(7.5), 1e-9);
  const CliResult bits = run("solve-fixed --bits " + data("hand_2x2.json"));
  EXPECT_NEAR(std::stod(value_of(bits.out, "capacity_bits")), std::log2(7.5), 1e-9);
}

TEST_F(Cli, JsonAndTomlAgree) {
  const CliResult a = run("solve-fixed " + data("nine_antennas.json"));
  const CliResult b = run("solve-fixed " + data("nine_antennas.toml"));
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  EXPECT_EQ(value_of(a.out, "powers"), value_of(b.out, "powers"));
}

TEST_F(Cli, OutWritesJsonReport) {
  const fs::path report = dir_ / "report.json";
  const CliResult r = run("solve-fixed " + data("hand_2x2.json") + " --out '" + report.string() + "'");
  ASSERT_EQ(r.code, 0);
  const auto doc = nlohmann::json::parse(slurp(report));
  EXPECT_TRUE(doc.contains("powers"));
  EXPECT_NEAR(doc["powers"][0].get<double>(), 0.5, 1e-9);
}

TEST_F(Cli, TpcOnlyMatchesJointWhenCapsAreSlack) {
  const CliResult joint = run("solve-fixed " + data("slack_caps.json"));
  const CliResult tpc = run("solve-fixed --tpc-only " + data("slack_caps.json"));
  ASSERT_EQ(joint.code, 0);
  ASSERT_EQ(tpc.code, 0);
  std::istringstream a(value_of(joint.out, "powers")), b(value_of(tpc.out, "powers"));
  double x = 0, y = 0;
  while (a >> x && b >> y) EXPECT_NEAR(x, y, 1e-9);
  EXPECT_EQ(run("solve-fixed --tpc-only --pgpc-only " + data("slack_caps.json")).code, 2);
}

TEST_F(Cli, SolveFadingActiveGroups) {
  const CliResult r = run("solve-fading " + data("fading_p24.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(value_of(r.out, "powers"), "5 5 5 0.75 0.75 0.75 0.75 6");
  EXPECT_EQ(value_of(r.out, "active_groups"), "2 1 3");
  const CliResult warn = run("solve-fading " + data("hand_2x2.json"));
  EXPECT_EQ(warn.code, 0);
  EXPECT_NE(warn.err.find("warning"), std::string::npos);
}

TEST_F(Cli, SweepCsv) {
  const CliResult r = run("sweep " + data("nine_antennas.json") + " --grid 1:3:1 --curves JOINT,TPC");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("# groupfill sweep", 0), 0u);
  std::getline(lines, line);
  EXPECT_EQ(line, "P_T,JOINT,TPC_ONLY");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(run("sweep " + data("nine_antennas.json") + " --grid 1:3:1 --curves JENSEN").code, 2);
  EXPECT_EQ(run("sweep " + data("fading_p8.json") + " --grid 1:3:1 --curves JENSEN --mode fading").code,
            0);
}

TEST_F(Cli, VerifyPassesAndInjectionFails) {
  EXPECT_EQ(run("verify " + data("hand_2x2.json")).code, 0);
  const CliResult bad = run("verify " + data("hand_2x2.json") + " --inject-perturbation 0.1");
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("FAIL fixed.oracle_gap"), std::string::npos);
  const CliResult rnd = run("verify --random 4 2 7 5");
  EXPECT_EQ(rnd.code, 0) << rnd.out;
  EXPECT_NE(rnd.out.find("summary:"), std::string::npos);
}

TEST_F(Cli, MonteCarlo) {
  const CliResult r = run("montecarlo " + data("fading_p8.json") + " --samples 20000 --seed 3");
  ASSERT_EQ(r.code, 0) << r.err;
  const double mean = std::stod(value_of(r.out, "mean_nats"));
  const double se = std::stod(value_of(r.out, "std_error_nats"));
  const double exact = std::stod(value_of(r.out, "closed_form_nats"));
  EXPECT_LE(std::abs(mean - exact), 5 * se);
  EXPECT_EQ(run("montecarlo " + data("fading_p8.json") + " --samples 0").code, 2);
  EXPECT_EQ(run("montecarlo " + data("fading_p8.json") + " --ensemble rayleigh-mimo:2x3").code, 2);
  EXPECT_EQ(run("montecarlo " + data("fading_p8.json") +
                " --ensemble rayleigh-mimo:2x8 --samples 2000").code,
            0);
}

TEST_F(Cli, OutputIndependentOfThreadCount) {
  const std::string args = "montecarlo " + data("fading_p8.json") + " --samples 50000 --seed 9";
  const CliResult one = run(args, "GROUPFILL_THREADS=1");
  const CliResult four = run(args, "GROUPFILL_THREADS=4");
  ASSERT_EQ(one.code, 0);
  EXPECT_EQ(one.out, four.out);
}

TEST_F(Cli, ErrorExitCodes) {
  const fs::path bad = dir_ / "bad.json";
  std::ofstream(bad) << R"({"groups": [[1]], "caps": [1, 2], "total_power": 1})";
  const CliResult schema = run("solve-fixed '" + bad.string() + "'");
  EXPECT_EQ(schema.code, 2);
  EXPECT_EQ(schema.err.rfind("error: SchemaError", 0), 0u) << schema.err;

  const fs::path overlap = dir_ / "overlap.json";
  std::ofstream(overlap) << R"({"gains": [1, 1], "groups": [[1, 2], [2]], "caps": [1, 1], "total_power": 1})";
  const CliResult o = run("solve-fixed '" + overlap.string() + "'");
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(o.err.find("OverlappingGroups"), std::string::npos);

  EXPECT_EQ(run("solve-fixed /nonexistent/problem.json").code, 2);
  EXPECT_EQ(run("bogus-command").code, 2);
  EXPECT_EQ(run("solve-fixed " + data("nine_antennas.json") + " --tol 1e-300").code, 3);
}

}  // namespace
