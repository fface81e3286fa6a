#include "bsde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bsde/errors.hpp"

namespace bsde {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw Error(ErrorKind::Diagnostic, "mean of an empty sample");
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  if (xs.size() < 2) throw Error(ErrorKind::Diagnostic, "variance needs two samples");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return ss / static_cast<double>(xs.size() - 1);
}

double standard_error(std::span<const double> xs) {
  return std::sqrt(variance(xs) / static_cast<double>(xs.size()));
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw Error(ErrorKind::Diagnostic, "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::Diagnostic, "quantile level outside [0, 1]");
  std::sort(xs.begin(), xs.end());
  const double pos = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return xs[lo] + frac * (xs[hi] - xs[lo]);
}

double kolmogorov_survival(double lambda) {
  // The alternating series converges poorly below ~0.2, where P is 1 to
  // double precision anyway.
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 50; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

NormalityDiagnostics normality_diagnostics(std::span<const double> samples,
                                           double target_variance) {
  if (samples.size() < 100) {
    throw Error(ErrorKind::Diagnostic, "normality diagnostics need at least 100 samples");
  }
  if (!(target_variance > 0.0) || !std::isfinite(target_variance)) {
    throw Error(ErrorKind::Diagnostic, "target variance must be positive and finite");
  }
  const double var = variance(samples);
  if (!(var > 0.0)) throw Error(ErrorKind::Diagnostic, "sample has zero variance");

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double scale = std::sqrt(2.0 * target_variance);
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-sorted[i] / scale);
    const double above = static_cast<double>(i + 1) / n - cdf;
    const double below = cdf - static_cast<double>(i) / n;
    d = std::max({d, above, below});
  }
  const double sn = std::sqrt(n);
  // Stephens' small-sample correction to the asymptotic argument.
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  return {var / target_variance, d, kolmogorov_survival(lambda)};
}

PairedTest paired_z_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw Error(ErrorKind::Diagnostic, "paired test needs two equal samples of size >= 2");
  }
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  PairedTest out;
  out.mean_difference = mean(diff);
  const double se = standard_error(diff);
  if (!(se > 0.0)) throw Error(ErrorKind::Diagnostic, "paired differences have zero variance");
  out.z = out.mean_difference / se;
  out.p_value = 0.5 * std::erfc(out.z / std::sqrt(2.0));
  return out;
}

}  // namespace bsde
