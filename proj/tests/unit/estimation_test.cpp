#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "bsde/errors.hpp"
#include "bsde/estimation.hpp"
#include "bsde/random.hpp"

namespace bsde {
namespace {

const Interval kTheta{0.0, 2.0};

ForwardPaths simulate(const ModelSpec& m, double theta, double eps, const TimeGrid& g,
                      std::uint64_t stream) {
  return simulate_forward(m, theta, eps, g, NoiseSource{2024, stream});
}

TEST(EstimationWindow, OffGridDeltaNamesField) {
  const TimeGrid g(0.0, 1.0, 100);
  try {
    EstimationWindow{0.1234, {}}.validate(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Configuration);
    EXPECT_NE(std::string(e.what()).find("delta"), std::string::npos);
  }
  EXPECT_THROW((EstimationWindow{0.2, {0.1}}.validate(g)), Error);
  EXPECT_NO_THROW((EstimationWindow{0.1, {0.5, 1.0}}.validate(g)));
}

TEST(Mde, RecoversThetaWithoutNoise) {
  const ModelSpec m = ou_model(1.0, {-1.0, 1.0}, 1.0, 1.0);
  const TimeGrid g(0.0, 1.0, 200);
  const auto p = simulate(m, 0.35, 0.0, g, 1);
  // Euler path vs RK4 limit: agreement to the Euler bias.
  EXPECT_NEAR(mde_estimate(p.X, m, 0.2), 0.35, 5e-3);
  const ModelSpec c = constant_drift_model(1.0, kTheta, 0.0, 1.0);
  EXPECT_NEAR(mde_estimate(simulate(c, 1.3, 0.0, g, 1).X, c, 0.1), 1.3, 1e-9);
}

TEST(Mde, ConstantDriftClosedForm) {
  // theta* = int s (X_s - x0) ds / int s^2 ds under the trapezoid rule.
  const ModelSpec m = constant_drift_model(1.0, kTheta, 0.2, 1.0);
  const TimeGrid g(0.0, 1.0, 1000);
  const auto p = simulate(m, 1.0, 0.1, g, 5);
  const std::size_t kd = 100;
  std::vector<double> num(kd + 1), den(kd + 1);
  for (std::size_t k = 0; k <= kd; ++k) {
    const double s = g.node(k);
    num[k] = s * (p.X[k] - 0.2);
    den[k] = s * s;
  }
  const double expected = trapezoid(num, g.step(), kd) / trapezoid(den, g.step(), kd);
  EXPECT_NEAR(mde_estimate(p.X, m, 0.1), expected, 1e-8);
}

TEST(Fisher, ClosedForms) {
  const TimeGrid g(0.0, 1.0, 2000);
  const ModelSpec c = constant_drift_model(2.0, kTheta, 0.0, 1.0);
  EXPECT_NEAR(fisher_information(c, 1.0, solve_limit_ode(c, 1.0, g), 0.5), 0.5 / 4.0, 1e-12);
  const ModelSpec o = ou_model(1.0, {-1.0, 1.0}, 1.0, 1.0);
  const double th = 0.5;
  const double expected = (std::exp(2.0 * th) - 1.0) / (2.0 * th);
  EXPECT_NEAR(fisher_information(o, th, solve_limit_ode(o, th, g), 1.0), expected, 1e-6);
}

TEST(Fisher, SingularBelowFloor) {
  const ModelSpec o = ou_model(1.0, {-1.0, 1.0}, 0.0, 1.0);
  const TimeGrid g(0.0, 1.0, 100);
  try {
    fisher_information(o, 0.5, solve_limit_ode(o, 0.5, g), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularInformation);
  }
}

TEST(PrimitiveA, MatchesAntiderivative) {
  // OU with sigma = 2: B = x / 4, A = (x^2 - x0^2) / 8.
  const ModelSpec o = ou_model(2.0, {-1.0, 1.0}, 0.5, 1.0);
  EXPECT_NEAR(primitive_A(o, 0.3, 0.2, 1.7), (1.7 * 1.7 - 0.25) / 8.0, 1e-12);
}

TEST(DeltaHead, ConstantDriftClosedForm) {
  const ModelSpec m = constant_drift_model(1.5, kTheta, 0.1, 1.0);
  const TimeGrid g(0.0, 1.0, 500);
  const auto p = simulate(m, 1.0, 0.1, g, 3);
  const double theta = 0.7;
  const double xd = p.X.at_time(0.1);
  EXPECT_NEAR(delta_head(m, theta, p.X, 0.1, 0.1), (xd - 0.1 - theta * 0.1) / 2.25, 1e-10);
}

TEST(DeltaHead, AgreesWithItoSumOnNonlinearModel) {
  // The rewritten score equals the left-point stochastic integral up to
  // discretization error.
  const ModelSpec m = nonlinear_model({}, kTheta, 0.3, 1.0);
  const TimeGrid g(0.0, 1.0, 20000);
  const double eps = 0.2;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto p = simulate(m, 1.0, eps, g, s);
    const double head = delta_head(m, 0.8, p.X, 0.2, eps);
    const double ito = delta_tail(m, 0.8, p.X, 0.0, 0.2);
    worst = std::max(worst, std::abs(head - ito));
  }
  EXPECT_LT(worst, 5e-3);
}

TEST(OneStep, ConstantDriftIsExplicitMle) {
  const ModelSpec m = constant_drift_model(1.0, kTheta, 0.25, 1.0);
  const TimeGrid g(0.0, 1.0, 1000);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto p = simulate(m, 1.0, 0.1, g, s);
    const double mle = (p.X.at_time(0.5) - 0.25) / 0.5;
    for (double pilot : {0.0, 0.6, 1.0, 1.9}) {
      const auto r = one_step_mle(m, pilot, p.X, 0.1, 0.5, 0.1);
      EXPECT_NEAR(r.theta, mle, 1e-10);
      EXPECT_FALSE(r.clamped);
    }
  }
}

TEST(OneStep, ClampsToTheta) {
  const ModelSpec m = constant_drift_model(1.0, {0.9, 1.1}, 0.0, 1.0);
  const TimeGrid g(0.0, 1.0, 100);
  const auto p = simulate(m, 1.0, 0.5, g, 11);
  const auto r = one_step_mle(m, 1.0, p.X, 0.1, 0.2, 0.5);
  if (r.unclamped > 1.1 || r.unclamped < 0.9) {
    EXPECT_TRUE(r.clamped);
    EXPECT_TRUE(r.theta == 0.9 || r.theta == 1.1);
  } else {
    EXPECT_FALSE(r.clamped);
  }
}

TEST(OneStep, EstimatorMatchesSingleShot) {
  const ModelSpec m = nonlinear_model({}, kTheta, 0.0, 1.0);
  const TimeGrid g(0.0, 1.0, 400);
  const auto p = simulate(m, 1.2, 0.05, g, 4);
  const OneStepEstimator est(m, 1.1, p.X, 0.1, 0.05);
  for (double t : {0.1, 0.5, 1.0}) {
    EXPECT_DOUBLE_EQ(est.at_time(t).theta, one_step_mle(m, 1.1, p.X, 0.1, t, 0.05).theta);
  }
  EXPECT_THROW(est.at_time(0.05), Error);
}

TEST(OneStep, ErrorScalesLikeFisherInverse) {
  // Var((theta~ - theta0) / eps) ~ 1 / I on the nonlinear model.
  const ModelSpec m = nonlinear_model({}, kTheta, 0.0, 1.0);
  const TimeGrid g(0.0, 1.0, 400);
  const double eps = 0.02;
  std::vector<double> err;
  for (std::uint64_t s = 0; s < 400; ++s) {
    const auto p = simulate(m, 1.0, eps, g, s);
    const double pilot = mde_estimate(p.X, m, 0.1);
    err.push_back((one_step_mle(m, pilot, p.X, 0.1, 1.0, eps).theta - 1.0) / eps);
  }
  double mean = 0.0, var = 0.0;
  for (double e : err) mean += e;
  mean /= err.size();
  for (double e : err) var += (e - mean) * (e - mean);
  var /= err.size() - 1;
  const double info = fisher_information(m, 1.0, solve_limit_ode(m, 1.0, g), 1.0);
  EXPECT_NEAR(var * info, 1.0, 0.2);
}

TEST(FullMle, ConstantDrift) {
  const ModelSpec m = constant_drift_model(1.0, kTheta, 0.0, 1.0);
  const TimeGrid g(0.0, 1.0, 1000);
  const auto p = simulate(m, 1.0, 0.1, g, 8);
  EXPECT_NEAR(full_mle(m, p.X, 0.5, 0.1), p.X.at_time(0.5) / 0.5, 1e-7);
}

TEST(MdeVariance, ConstantDriftClosedForm) {
  // 6 sigma^2 / (5 delta).
  const ModelSpec m = constant_drift_model(1.0, kTheta, 0.0, 1.0);
  EXPECT_NEAR(mde_asymptotic_variance(m, 1.0, 0.1), 12.0, 1e-4);
  const ModelSpec m2 = constant_drift_model(0.5, kTheta, 0.0, 1.0);
  EXPECT_NEAR(mde_asymptotic_variance(m2, 1.0, 0.2), 6.0 * 0.25 / 1.0, 1e-4);
}

TEST(MdeVariance, MatchesMonteCarlo) {
  const ModelSpec m = ou_model(1.0, {-1.0, 1.0}, 1.0, 1.0);
  const TimeGrid g(0.0, 1.0, 500);
  const double eps = 0.01;
  std::vector<double> err;
  for (std::uint64_t s = 0; s < 400; ++s) {
    err.push_back((mde_estimate(simulate(m, 0.5, eps, g, s).X, m, 0.2) - 0.5) / eps);
  }
  double mean = 0.0, var = 0.0;
  for (double e : err) mean += e;
  mean /= err.size();
  for (double e : err) var += (e - mean) * (e - mean);
  var /= err.size() - 1;
  EXPECT_NEAR(var / mde_asymptotic_variance(m, 0.5, 0.2), 1.0, 0.2);
}

TEST(Xi, ConstantDriftIsScaledBrownian) {
  const ModelSpec m = constant_drift_model(2.0, kTheta, 0.0, 1.0);
  const TimeGrid g(0.0, 1.0, 100);
  const auto p = simulate(m, 1.0, 0.1, g, 2);
  EXPECT_NEAR(xi_limit(m, 1.0, p.W, 0.5), 2.0 * p.W.at_time(0.5) / 0.5, 1e-12);
  EXPECT_TRUE(std::isnan(xi_limit_path(m, 1.0, p.W)[0]));
}

TEST(Trace, CsvHeaderAndRows) {
  const ModelSpec m = constant_drift_model(1.0, kTheta, 0.0, 1.0);
  const TimeGrid g(0.0, 1.0, 100);
  const auto p = simulate(m, 1.0, 0.1, g, 2);
  const OneStepEstimator est(m, 1.0, p.X, 0.1, 0.1);
  const auto trace = make_trace(est, {0.1, 0.5, 1.0});
  std::ostringstream out;
  write_trace_csv(out, trace);
  const std::string csv = out.str();
  EXPECT_EQ(csv.rfind("t,theta_onestep,fisher,delta_tail\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

}  // namespace
}  // namespace bsde
