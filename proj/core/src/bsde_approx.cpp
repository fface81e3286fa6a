#include "bsde/bsde_approx.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "bsde/errors.hpp"

namespace bsde {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

BsdeApproximation approximate_bsde(const ModelSpec& model, const ValueFunction& vf,
                                   const Path& X, const Path& W,
                                   const EstimationWindow& window, double epsilon,
                                   std::optional<double> theta0,
                                   const ApproximationOptions& options) {
  const TimeGrid& grid = X.grid();
  window.validate(grid);
  const std::size_t kd = grid.require_node(window.delta, "delta");
  const std::size_t n = grid.n_steps();
  const TimeGrid sub = grid.slice(kd, n);

  const double pilot = mde_estimate(X, model, window.delta, options.pilot);
  const OneStepEstimator estimator(model, pilot, X, window.delta, epsilon, options.fisher_floor);

  BsdeApproximation out{X.slice(kd, n), Path(sub, kNaN), Path(sub, kNaN), {}, {}, {}, {}, 0, {}};
  out.trace.theta_pilot = pilot;
  out.trace.delta_head = estimator.head();
  out.trace.rows.reserve(sub.size());
  if (theta0) {
    out.Y_true = Path(sub, kNaN);
    out.Z_true = Path(sub, kNaN);
    out.xi = xi_limit_path(model, *theta0, W, options.fisher_floor).slice(kd, n);
  }

  for (std::size_t j = 0; j < sub.size(); ++j) {
    const std::size_t k = kd + j;
    const double t = grid.node(k);
    const double x = X[k];
    const double noise = epsilon * model.diffusion(t, x);
    try {
      const OneStepResult r = estimator.at(k);
      out.trace.rows.push_back({t, r.theta, r.fisher, r.delta_tail, r.clamped});
      if (r.clamped) ++out.n_clamped;
      if (options.include_z) {
        const auto v = vf.value_and_slope(t, x, r.theta);
        out.Y_hat[j] = v.u;
        out.Z_hat[j] = noise * v.u_x;
      } else {
        out.Y_hat[j] = vf.u(t, x, r.theta);
      }
      if (theta0) {
        if (options.include_z) {
          const auto v = vf.value_and_slope(t, x, *theta0);
          (*out.Y_true)[j] = v.u;
          (*out.Z_true)[j] = noise * v.u_x;
        } else {
          (*out.Y_true)[j] = vf.u(t, x, *theta0);
        }
      }
    } catch (const Error&) {
      if (out.trace.rows.size() == j) out.trace.rows.push_back({t, kNaN, kNaN, kNaN, false});
      out.failed_nodes.push_back(j);
    }
  }
  return out;
}

ResidualPaths residual_decomposition(const BsdeApproximation& approx, const ValueFunction& vf,
                                     const ModelSpec& model, double theta0, double epsilon) {
  const TimeGrid& sub = approx.Y_hat.grid();
  ResidualPaths out{Path(sub, 0.0), Path(sub, 0.0), false};
  if (epsilon == 0.0) {
    out.skipped = true;
    return out;
  }
  if (!approx.Y_true || !approx.Z_true || !approx.xi) {
    throw Error(ErrorKind::Configuration,
                "residuals need the true-parameter processes (pass theta0)");
  }
  for (std::size_t j = 0; j < sub.size(); ++j) {
    const double t = sub.node(j);
    const double x = approx.X[j];
    const double xi = (*approx.xi)[j];
    out.rY[j] = (approx.Y_hat[j] - (*approx.Y_true)[j] - epsilon * vf.u_theta(t, x, theta0) * xi) /
                epsilon;
    out.rZ[j] = (approx.Z_hat[j] - (*approx.Z_true)[j] -
                 epsilon * epsilon * model.diffusion(t, x) * vf.u_theta_x(t, x, theta0) * xi) /
                (epsilon * epsilon);
  }
  return out;
}

EfficiencyBounds efficiency_bounds(const ModelSpec& model, const ValueFunction& vf,
                                   double theta0, double t, std::size_t n_steps) {
  if (!(t > 0.0 && t <= model.horizon)) {
    throw Error(ErrorKind::Domain, "bound time must lie in (0, T]");
  }
  const TimeGrid grid(0.0, t, n_steps);
  const Path x = solve_limit_ode(model, theta0, grid);
  EfficiencyBounds b;
  b.fisher = fisher_information(model, theta0, x, t);
  const double xt = x.back();
  const double slope = vf.u0_theta(t, xt, theta0);
  const double cross = vf.u0_theta_x(t, xt, theta0);
  const double sig = model.diffusion(t, xt);
  b.bound_y = slope * slope / b.fisher;
  b.bound_z = cross * cross * sig * sig / b.fisher;
  return b;
}

Path mde_plugin_comparator(const ModelSpec& model, const ValueFunction& vf, const Path& X,
                           const EstimationWindow& window, double theta_pilot) {
  (void)model;
  const TimeGrid& grid = X.grid();
  window.validate(grid);
  const std::size_t kd = grid.require_node(window.delta, "delta");
  const TimeGrid sub = grid.slice(kd, grid.n_steps());
  Path out(sub, kNaN);
  for (std::size_t j = 0; j < sub.size(); ++j) {
    out[j] = vf.u(sub.node(j), X[kd + j], theta_pilot);
  }
  return out;
}

Path mde_plugin_comparator(const ModelSpec& model, const ValueFunction& vf, const Path& X,
                           const EstimationWindow& window, const MinimizeOptions& pilot_options) {
  const double pilot = mde_estimate(X, model, window.delta, pilot_options);
  return mde_plugin_comparator(model, vf, X, window, pilot);
}

void write_approximation_csv(std::ostream& out, const BsdeApproximation& approx) {
  out << "t,X,Y_true,Y_hat,Z_true,Z_hat,theta_onestep\n" << std::setprecision(17);
  const TimeGrid& sub = approx.Y_hat.grid();
  for (std::size_t j = 0; j < sub.size(); ++j) {
    out << sub.node(j) << ',' << approx.X[j] << ',';
    if (approx.Y_true) out << (*approx.Y_true)[j];
    out << ',' << approx.Y_hat[j] << ',';
    if (approx.Z_true) out << (*approx.Z_true)[j];
    out << ',' << approx.Z_hat[j] << ',' << approx.trace.rows[j].theta_onestep << '\n';
  }
}

}  // namespace bsde
