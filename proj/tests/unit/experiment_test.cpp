#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bsde/errors.hpp"
#include "bsde/experiment.hpp"
#include "bsde/random.hpp"
#include "bsde/stats.hpp"

namespace bsde {
namespace {

ExperimentConfig quick_config() {
  ExperimentConfig c;
  c.n_replications = 100;
  c.epsilon_list = {0.1};
  c.workers = 1;
  return c;
}

std::string validation_message(const ExperimentConfig& c) {
  try {
    c.validate();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Configuration);
    return e.what();
  }
  ADD_FAILURE() << "expected a configuration error";
  return {};
}

TEST(Config, ValidationNamesField) {
  auto c = quick_config();
  c.n_replications = 50;
  EXPECT_NE(validation_message(c).find("n_replications"), std::string::npos);
  c = quick_config();
  c.epsilon_list = {0.05, 0.1};
  EXPECT_NE(validation_message(c).find("epsilon_list"), std::string::npos);
  c = quick_config();
  c.delta = 0.1234;
  EXPECT_NE(validation_message(c).find("delta"), std::string::npos);
  c = quick_config();
  c.t_report = {0.05};
  EXPECT_NE(validation_message(c).find("t_"), std::string::npos);
  c = quick_config();
  c.model.name = "linear-ou";
  EXPECT_NE(validation_message(c).find("backend"), std::string::npos);
  c.model.name = "bogus";
  EXPECT_NE(validation_message(c).find("model"), std::string::npos);
  EXPECT_NO_THROW(quick_config().validate());
}

TEST(Stats, KolmogorovSeries) {
  EXPECT_NEAR(kolmogorov_survival(1.0), 0.26999967, 1e-7);
  EXPECT_NEAR(kolmogorov_survival(1.36), 0.0494, 5e-4);
  EXPECT_EQ(kolmogorov_survival(0.1), 1.0);
}

TEST(Stats, QuantileInterpolates) {
  EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(quantile({4.0, 1.0, 3.0, 2.0}, 1.0), 4.0);
}

std::vector<double> normals(std::size_t n, double shift = 0.0, std::uint64_t stream = 0) {
  const NoiseSource src{77, stream};
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = src.normal(k) + shift;
  return out;
}

TEST(Normality, NullCase) {
  const auto d = normality_diagnostics(normals(2000), 1.0);
  EXPECT_NEAR(d.variance_ratio, 1.0, 0.1);
  EXPECT_GT(d.p_value, 0.01);
  // Under the null the p-value is uniform: about 5% of streams fall below 0.05.
  int rejected = 0;
  for (std::uint64_t s = 1; s <= 400; ++s) {
    rejected += normality_diagnostics(normals(1000, 0.0, s), 1.0).p_value < 0.05;
  }
  EXPECT_GE(rejected, 8);
  EXPECT_LE(rejected, 36);
}

TEST(Normality, ShiftedSampleIsRejected) {
  EXPECT_LT(normality_diagnostics(normals(500, 1.0), 1.0).p_value, 0.01);
}

TEST(Normality, DegenerateInputs) {
  const std::vector<double> constant(200, 1.5);
  try {
    normality_diagnostics(constant, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Diagnostic);
  }
  EXPECT_THROW(normality_diagnostics(normals(50), 1.0), Error);
}

TEST(MonteCarlo, QuickRunRatioNearOne) {
  const auto report = run_monte_carlo(quick_config());
  ASSERT_EQ(report.rows.size(), 1u);
  const auto& row = report.rows[0];
  EXPECT_NEAR(row.bound_y, 0.5 * std::exp(0.1), 1e-9);
  EXPECT_GE(row.ratio_y, 0.7);
  EXPECT_LE(row.ratio_y, 1.4);
  EXPECT_EQ(row.n_ok + row.n_failed + row.n_diverged, 100u);
  EXPECT_EQ(report.summaries[0].terminal_max_error, 0.0);
}

TEST(MonteCarlo, DeterministicAcrossWorkerCounts) {
  auto c = quick_config();
  c.terminal = "sine";
  c.epsilon_list = {0.1, 0.05};
  std::ostringstream a, b, d;
  write_report_csv(a, run_monte_carlo(c));
  write_report_csv(b, run_monte_carlo(c));
  c.workers = 3;
  write_report_csv(d, run_monte_carlo(c));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str(), d.str());
  EXPECT_EQ(a.str().rfind("epsilon,t,riskY,boundY,ratioY,riskZ,boundZ,ratioZ,var_ratio_theta,"
                          "ks_p,n_clamped,n_diverged\n",
                          0),
            0u);
}

TEST(MonteCarlo, PdeBackendOnOu) {
  ExperimentConfig c = quick_config();
  c.model.name = "linear-ou";
  c.model.x0 = 1.0;
  c.model.theta_interval = {-1.0, 1.0};
  c.theta0 = 0.5;
  c.backend = Backend::Pde;
  c.n_steps = 200;
  c.pde_n_theta = 9;
  const auto report = run_monte_carlo(c);
  const auto& row = report.rows[0];
  EXPECT_TRUE(std::isfinite(row.ratio_y));
  EXPECT_GT(row.ratio_y, 0.5);
  EXPECT_LT(row.ratio_y, 2.0);
  std::ostringstream summary;
  write_summary(summary, report);
  EXPECT_NE(summary.str().find("linear-ou"), std::string::npos);
}

TEST(PathConcentration, ConstantDriftIsEpsInvariant) {
  const ModelSpec m = constant_drift_model(1.0, {0.0, 2.0}, 0.0, 1.0);
  const auto rows =
      path_concentration(m, 1.0, {0.1, 0.05}, TimeGrid(0.0, 1.0, 200), 200, 5, 1);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_NEAR(rows[0].sup_sq, rows[1].sup_sq, 1e-9 * rows[0].sup_sq);
}

TEST(DeltaSchedule, Parsing) {
  EXPECT_NEAR(parse_delta_schedule("eps2log").delta(0.1, 0.0), 0.01 * std::log(10.0), 1e-15);
  EXPECT_NEAR(parse_delta_schedule("power:3").delta(0.1, 0.0), 1e-3, 1e-15);
  EXPECT_EQ(parse_delta_schedule("fixed").delta(0.1, 0.2), 0.2);
  EXPECT_THROW(parse_delta_schedule("power:x"), Error);
  EXPECT_THROW(parse_delta_schedule("cubic"), Error);
}

TEST(DeltaStudy, FlagsVanishingWindow) {
  auto c = quick_config();
  c.epsilon_list = {0.1, 0.05};
  c.n_steps = 2000;
  const auto report = delta_shrink_study(c, {"eps2log", "power:3"});
  ASSERT_EQ(report.verdicts.size(), 2u);
  EXPECT_FALSE(report.verdicts[0].proxy_flagged);
  EXPECT_TRUE(report.verdicts[1].proxy_flagged);
  for (const auto& row : report.rows) {
    if (!row.skipped) {
      EXPECT_GE(row.delta_steps, 2u);
      EXPECT_EQ(row.n_ok, 100u);
    }
  }
}

}  // namespace
}  // namespace bsde
