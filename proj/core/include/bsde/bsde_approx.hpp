#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "bsde/estimation.hpp"
#include "bsde/model.hpp"
#include "bsde/value_function.hpp"

namespace bsde {

// Y^_t = u(t, X_t, theta~_t), Z^_t = eps sigma(t, X_t) u_x(t, X_t, theta~_t)
// on the grid nodes of [delta, T], plus the true-parameter processes when
// theta0 is known (experiment mode).
struct BsdeApproximation {
  Path X;
  Path Y_hat;
  Path Z_hat;
  std::optional<Path> Y_true;
  std::optional<Path> Z_true;
  std::optional<Path> xi;
  EstimateTrace trace;  // one row per node of [delta, T]
  std::size_t n_clamped = 0;
  std::vector<std::size_t> failed_nodes;  // window-relative indices holding NaN
};

struct ApproximationOptions {
  bool include_z = true;
  double fisher_floor = kDefaultFisherFloor;
  MinimizeOptions pilot;
};

BsdeApproximation approximate_bsde(const ModelSpec& model, const ValueFunction& vf,
                                   const Path& X, const Path& W,
                                   const EstimationWindow& window, double epsilon,
                                   std::optional<double> theta0 = std::nullopt,
                                   const ApproximationOptions& options = {});

struct ResidualPaths {
  Path rY;
  Path rZ;
  bool skipped = false;  // eps = 0: residuals are defined as zero
};

// rY = (Y^ - Y - eps u_theta(t, X, theta0) xi) / eps,
// rZ = (Z^ - Z - eps^2 sigma u_theta_x(t, X, theta0) xi) / eps^2.
ResidualPaths residual_decomposition(const BsdeApproximation& approx, const ValueFunction& vf,
                                     const ModelSpec& model, double theta0, double epsilon);

struct EfficiencyBounds {
  double bound_y = 0.0;
  double bound_z = 0.0;
  double fisher = 0.0;
};

// Lower bounds on eps^-2 E|Y_bar - Y|^2 and eps^-4 E|Z_bar - Z|^2 at time t:
//   u0_theta(t, x_t)^2 / I   and   u0_theta_x(t, x_t)^2 sigma(t, x_t)^2 / I,
// along the limit path of theta0.
EfficiencyBounds efficiency_bounds(const ModelSpec& model, const ValueFunction& vf,
                                   double theta0, double t, std::size_t n_steps = 1000);

// Plug-in Y_bar_t = u(t, X_t, theta*) with the pilot frozen, on [delta, T].
Path mde_plugin_comparator(const ModelSpec& model, const ValueFunction& vf, const Path& X,
                           const EstimationWindow& window, double theta_pilot);
Path mde_plugin_comparator(const ModelSpec& model, const ValueFunction& vf, const Path& X,
                           const EstimationWindow& window,
                           const MinimizeOptions& pilot_options = {});

// Columns: t, X, Y_true, Y_hat, Z_true, Z_hat, theta_onestep.
void write_approximation_csv(std::ostream& out, const BsdeApproximation& approx);

}  // namespace bsde
