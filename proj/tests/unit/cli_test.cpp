#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "bsde_cli/cli.hpp"
#include "bsde_cli/config_io.hpp"

namespace bsde::cli {
namespace {

namespace fs = std::filesystem;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("bsde_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    write("linear.cfg",
          "# constant-drift linear model\n"
          "model.name = linear-constant-drift\n"
          "beta = 0.1\n"
          "gamma = 0.2\n"
          "theta0 = 1.0\n"
          "delta = 0.1\n"
          "t_report = [0.5]\n");
  }
  void TearDown() override { fs::remove_all(root_); }

  void write(const std::string& name, const std::string& text) {
    std::ofstream(root_ / name) << text;
  }
  std::string read(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
  }
  int run(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run_cli(args, out_, err_);
  }
  std::string cfg() const { return (root_ / "linear.cfg").string(); }
  std::string dir(const std::string& name) const { return (root_ / name).string(); }

  fs::path root_;
  std::ostringstream out_, err_;
};

TEST_F(CliTest, SimulateIsByteIdentical) {
  ASSERT_EQ(run({"simulate", "--config", cfg(), "--seed", "7", "--output", dir("a")}), kSuccess);
  ASSERT_EQ(run({"simulate", "--config", cfg(), "--seed", "7", "--output", dir("b")}), kSuccess);
  const std::string x = read(root_ / "a" / "X.csv");
  EXPECT_EQ(x.rfind("t,value\n", 0), 0u);
  EXPECT_EQ(x, read(root_ / "b" / "X.csv"));
  EXPECT_EQ(read(root_ / "a" / "W.csv"), read(root_ / "b" / "W.csv"));
  ASSERT_EQ(run({"simulate", "--config", cfg(), "--seed", "8", "--output", dir("c")}), kSuccess);
  EXPECT_NE(x, read(root_ / "c" / "X.csv"));
}

TEST_F(CliTest, ExperimentQuickModeDefaults) {
  ASSERT_EQ(run({"experiment", "--config", cfg(), "--output", dir("e"), "--workers", "1"}),
            kSuccess)
      << err_.str();
  const std::string report = read(root_ / "e" / "report.csv");
  EXPECT_NE(report.find("ratioY"), std::string::npos);
  EXPECT_EQ(std::count(report.begin(), report.end(), '\n'), 2);
  EXPECT_TRUE(fs::exists(root_ / "e" / "summary.txt"));
  const std::string eff = read(root_ / "e" / "config.effective.json");
  EXPECT_NE(eff.find("\"n_replications\": 200"), std::string::npos);
  EXPECT_NE(eff.find("0.1"), std::string::npos);
}

TEST_F(CliTest, FullModeDefaults) {
  RunConfig full = default_run_config(true);
  EXPECT_EQ(full.experiment.n_replications, 5000u);
  EXPECT_EQ(full.experiment.epsilon_list, (std::vector<double>{0.1, 0.05, 0.02}));
  ASSERT_EQ(run({"simulate", "--full", "--config", cfg(), "--output", dir("f")}), kSuccess);
  EXPECT_NE(read(root_ / "f" / "config.effective.json").find("5000"), std::string::npos);
}

TEST_F(CliTest, OffGridDeltaIsValidationError) {
  EXPECT_EQ(run({"experiment", "--config", cfg(), "--set", "delta=0.1234", "--output", dir("x")}),
            kValidationError);
  EXPECT_NE(err_.str().find("delta"), std::string::npos);
}

TEST_F(CliTest, UnknownKeyIsNamed) {
  write("bad.json", R"({"model": {"name": "linear-ou", "sigmaa": 2}})");
  EXPECT_EQ(run({"simulate", "--config", (root_ / "bad.json").string(), "--output", dir("x")}),
            kValidationError);
  EXPECT_NE(err_.str().find("model.sigmaa"), std::string::npos);
  EXPECT_EQ(run({"simulate", "--config", cfg(), "--set", "n_stepz=3", "--output", dir("x")}),
            kValidationError);
  EXPECT_NE(err_.str().find("n_stepz"), std::string::npos);
}

TEST_F(CliTest, JsonConfigAndTypeErrors) {
  write("ou.json", R"({"model": {"name": "linear-ou", "x0": 1.0, "theta_lo": -1, "theta_hi": 1},
                       "theta0": 0.5, "backend": "pde", "n_steps": 200})");
  EXPECT_EQ(run({"estimate", "--config", (root_ / "ou.json").string(), "--output", dir("o")}),
            kSuccess)
      << err_.str();
  EXPECT_TRUE(fs::exists(root_ / "o" / "trace.csv"));
  EXPECT_EQ(run({"simulate", "--config", cfg(), "--set", "n_steps=\"many\"", "--output", dir("x")}),
            kValidationError);
}

TEST_F(CliTest, RuntimeFailureExitCode) {
  EXPECT_EQ(run({"simulate", "--config", cfg(), "--set", "model.name=custom-pde", "--set", "backend=pde", "--set",
                 "model.nonlinear.lambda=-50", "--output", dir("x")}),
            kRuntimeFailure);
  EXPECT_NE(err_.str().find("simulate"), std::string::npos);
}

TEST_F(CliTest, UnknownSubcommandAndHelp) {
  EXPECT_EQ(run({"bogus"}), kValidationError);
  EXPECT_EQ(run({"--help"}), kSuccess);
  EXPECT_NE(out_.str().find("experiment"), std::string::npos);
}

TEST_F(CliTest, EffectiveConfigReproducesOutputs) {
  ASSERT_EQ(run({"approximate", "--config", cfg(), "--set", "terminal=sine", "--set", "stream=3",
                 "--seed", "11", "--output", dir("first")}),
            kSuccess);
  const std::string echo = (root_ / "first" / "config.effective.json").string();
  ASSERT_EQ(run({"approximate", "--config", echo, "--output", dir("second")}), kSuccess);
  EXPECT_EQ(read(root_ / "first" / "approximation.csv"),
            read(root_ / "second" / "approximation.csv"));
  EXPECT_EQ(read(echo), read(root_ / "second" / "config.effective.json"));
}

TEST_F(CliTest, OtherSubcommandsWriteArtifacts) {
  ASSERT_EQ(run({"pde-solve", "--config", cfg(), "--output", dir("p")}), kSuccess) << err_.str();
  EXPECT_EQ(read(root_ / "p" / "pde.csv").rfind("t,x,u\n", 0), 0u);
  ASSERT_EQ(run({"delta-study", "--config", cfg(), "--set", "n_replications=100", "--set",
                 "n_steps=2000", "--output", dir("d"), "--workers", "1"}),
            kSuccess)
      << err_.str();
  EXPECT_NE(out_.str().find("FLAGGED"), std::string::npos);
  EXPECT_TRUE(fs::exists(root_ / "d" / "delta_study.csv"));
}

}  // namespace
}  // namespace bsde::cli
