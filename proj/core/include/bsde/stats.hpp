#pragma once

#include <span>
#include <vector>

namespace bsde {

double mean(std::span<const double> xs);
// Unbiased sample variance; requires at least two samples.
double variance(std::span<const double> xs);
// Standard error of the mean.
double standard_error(std::span<const double> xs);
// Linear-interpolated empirical quantile, q in [0, 1].
double quantile(std::vector<double> xs, double q);

// P(K > lambda) for the Kolmogorov distribution, 50-term series.
double kolmogorov_survival(double lambda);

struct NormalityDiagnostics {
  double variance_ratio = 0.0;
  double ks_statistic = 0.0;
  double p_value = 0.0;
};

// One-sample Kolmogorov-Smirnov test against N(0, target_variance).
// Requires >= 100 samples; zero sample variance throws ErrorKind::Diagnostic.
NormalityDiagnostics normality_diagnostics(std::span<const double> samples,
                                           double target_variance);

struct PairedTest {
  double mean_difference = 0.0;
  double z = 0.0;
  double p_value = 0.0;  // one-sided, H1: mean(a - b) > 0
};

PairedTest paired_z_test(std::span<const double> a, std::span<const double> b);

}  // namespace bsde
