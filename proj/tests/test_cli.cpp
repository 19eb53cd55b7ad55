#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "io.hpp"

namespace fs = std::filesystem;
using nlsstab::io::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("nlsstab_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Runs the front end with `args`, writing into a subdirectory named `out`; returns the exit code.
  int run(const std::string& args, const std::string& out = "out") const {
    const std::string cmd = std::string(NLSSTAB_CLI) + " " + args + " --out " + (dir_ / out).string() +
                            " > " + (dir_ / "stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& rel) const {
    std::ifstream in(dir_ / rel, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
  json read_json(const std::string& rel) const { return json::parse(read(rel)); }

  fs::path dir_;
};

}  // namespace

TEST(CsvFormat, QuotesOnlyWhenNeeded) {
  using nlsstab::io::csv_field;
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(csv_field(""), "");
}

TEST(CsvFormat, RowsUseCrlfAndFixedWidth) {
  nlsstab::io::Csv csv({"x", "note"});
  csv.row({"1", "a,b"});
  EXPECT_EQ(csv.str(), "x,note\r\n1,\"a,b\"\r\n");
  EXPECT_THROW(csv.row({"1"}), std::logic_error);
}

TEST(CsvFormat, NumbersRoundTrip) {
  for (double v : {0.1, -1.0 / 3.0, 6.02214076e23, 1e-300}) EXPECT_EQ(std::stod(nlsstab::io::number(v)), v);
  EXPECT_EQ(nlsstab::io::number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(nlsstab::io::cell(std::nullopt), "");
}

TEST_F(Cli, ConditionsReportsAllHoldForTheCollapseCase) {
  ASSERT_EQ(run("conditions --pipeline collapse --p 6 --gamma 1 --omega -2 --n 801"), 0);
  const json j = read_json("out/conditions.json");
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["command"], "conditions");
  EXPECT_TRUE(j["all_hold"].get<bool>());
  EXPECT_EQ(j["reports"][0]["condition"], "A1");
}

TEST_F(Cli, OutputIsByteIdenticalAcrossRuns) {
  const std::string args = "profile --p 3 --gamma 1 --omega -1 --n 401 --format both";
  ASSERT_EQ(run(args, "a"), 0);
  ASSERT_EQ(run(args, "b"), 0);
  EXPECT_EQ(read("a/profile.json"), read("b/profile.json"));
  EXPECT_EQ(read("a/profile.csv"), read("b/profile.csv"));
  EXPECT_FALSE(read("a/profile.json").empty());
}

TEST_F(Cli, DcurveWritesOneCsvRowPerFrequency) {
  ASSERT_EQ(run("dcurve --p 3 --gamma 1 --omega-range -2:-1:5 --n 801 --format csv"), 0);
  const std::string csv = read("out/dcurve.csv");
  int rows = 0;
  for (std::size_t pos = 0; (pos = csv.find("\r\n", pos)) != std::string::npos; pos += 2) ++rows;
  EXPECT_EQ(rows, 6);
  EXPECT_EQ(csv.rfind("omega,d,d1,d2,d3,", 0), 0u);
  EXPECT_FALSE(fs::exists(dir_ / "out/dcurve.json"));
}

TEST_F(Cli, DcurveRowFailureIsAPartialFailure) {
  // the derivative stencil around -0.2502 crosses the edge of the admissible interval
  EXPECT_EQ(run("dcurve --p 2 --gamma 1 --omega-range -0.2502:-1:2 --n 401"), 4);
  const json j = read_json("out/dcurve.json");
  ASSERT_EQ(j["rows"].size(), 2u);
}

TEST_F(Cli, InvalidInputIsAConfigurationError) {
  EXPECT_EQ(run("conditions --pipeline collapse --p 6 --gamma 1 --omega 0.5"), 2);
  EXPECT_EQ(run("conditions --pipeline sideways --p 6 --gamma 1 --omega -2"), 2);
  EXPECT_EQ(run("profile --p 3 --gamma 1 --omega -1 --format xml"), 2);
  EXPECT_EQ(run("spectrum --operator La --omega -1 --a 3"), 2);
  EXPECT_EQ(run("system --omega -1 --gamma 0.5 --dim 2"), 2);
  EXPECT_EQ(run("no-such-command"), 2);
}

TEST_F(Cli, MissingCriticalFrequencyIsANumericalFailure) {
  EXPECT_EQ(run("critical-omega --p 2 --gamma 1 --n 401"), 3);
}

TEST_F(Cli, FlagsOverrideTheConfigurationFile) {
  std::ofstream(dir_ / "run.toml") << "[profile]\np = 3.0\ngamma = 1.0\nomega = -1.0\nn = 401\n";
  ASSERT_EQ(run("--config " + (dir_ / "run.toml").string() + " profile --omega -2"), 0);
  const json j = read_json("out/profile.json");
  EXPECT_EQ(j["config"]["p"], 3.0);
  EXPECT_EQ(j["config"]["omega"], -2.0);
  EXPECT_EQ(j["config"]["n"], 401);
}

TEST_F(Cli, SimulateWritesTheTrajectory) {
  ASSERT_EQ(run("simulate --p 2 --gamma 1 --omega -2 --n 401 --direction random --amplitude 1e-3 "
                "--dt 1e-3 --t-end 0.1 --stride 10 --format both"),
            0);
  const json j = read_json("out/simulate.json");
  EXPECT_EQ(j["diagnostics"]["samples"], 11);
  EXPECT_TRUE(j["diagnostics"]["exit_time"].is_null());
  EXPECT_EQ(read("out/simulate.csv").rfind("t,E,Q,A,Lambda,P,tube_dist,identity_residual\r\n", 0), 0u);
}

TEST_F(Cli, VerifyAllRunsSelectedCriteria) {
  ASSERT_EQ(run("verify-all --only 1 2"), 0);
  const json j = read_json("out/verify_all.json");
  ASSERT_EQ(j["criteria"].size(), 2u);
  EXPECT_TRUE(j["criteria"][0]["passed"].get<bool>());
}
