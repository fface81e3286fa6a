#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "bsde/grid.hpp"
#include "bsde/random.hpp"

namespace bsde {

// Open parameter interval (lo, hi); estimators work on its closure.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double width() const noexcept { return hi - lo; }
  bool contains_closed(double v) const noexcept { return v >= lo && v <= hi; }
  double clamp(double v) const noexcept { return v < lo ? lo : (v > hi ? hi : v); }
};

using DriftFn = std::function<double(double theta, double t, double x)>;
using DiffusionFn = std::function<double(double t, double x)>;

// dX = S(theta, t, X) dt + eps * sigma(t, X) dW on [0, horizon], X_0 = x0.
// All derivative fields are analytic and supplied by the caller.
struct ModelSpec {
  std::string name;
  DriftFn drift;            // S
  DriftFn drift_dtheta;     // dS/dtheta
  DriftFn drift_ddtheta;    // d2S/dtheta2
  DriftFn drift_dx;         // dS/dx
  DriftFn drift_dtheta_dx;  // d2S/dtheta dx
  DiffusionFn diffusion;    // sigma
  DiffusionFn diffusion_dx; // dsigma/dx
  Interval theta_interval;
  double x0 = 0.0;
  double horizon = 1.0;
  double kappa = 1e-8;        // declared lower bound on sigma^2
  double lipschitz = 1e3;     // declared Lipschitz / linear-growth constant
};

struct ValidationOptions {
  double x_min = -5.0;
  double x_max = 5.0;
  std::size_t samples_t = 7;
  std::size_t samples_x = 11;
  std::size_t samples_theta = 5;
  double derivative_rtol = 1e-5;
};

// Spot-checks the declared invariants of a model on a sampling lattice:
// sigma^2 >= kappa, Lipschitz and linear-growth bounds, and agreement of the
// analytic derivative fields with central finite differences.
// Throws ErrorKind::InvalidModel naming the first violated property.
void validate_model(const ModelSpec& model, const ValidationOptions& options = {});

// x_t(theta) from dx/dt = S(theta, t, x), x_0 = x0, by fixed-step RK4 on
// `grid`, which must start at 0.
Path solve_limit_ode(const ModelSpec& model, double theta, const TimeGrid& grid);

struct ForwardPaths {
  Path X;
  Path W;
};

constexpr double kBlowUpThreshold = 1e12;

// Euler-Maruyama path of the observed diffusion and its driving Brownian
// motion. Throws ErrorKind::SimulationDiverged if |X| exceeds
// kBlowUpThreshold or becomes non-finite.
ForwardPaths simulate_forward(const ModelSpec& model, double theta, double epsilon,
                              const TimeGrid& grid, const NoiseSource& noise);

// d x_t / d theta via variation of constants:
//   xdot_t = int_0^t exp(int_s^t S'_x dv) Sdot(s, x_s) ds.
Path sensitivity_xdot(const ModelSpec& model, double theta, const TimeGrid& grid);

// Built-in models.
ModelSpec constant_drift_model(double sigma, Interval theta, double x0, double horizon);
ModelSpec ou_model(double sigma, Interval theta, double x0, double horizon);

// Nonlinear drift with state- and time-dependent diffusion:
//   S = theta (1 + a sin x) - lambda x,
//   sigma = s0 (1 + b t) (1 + c sin^2 x).
struct NonlinearModelParams {
  double a = 0.3;
  double lambda = 0.5;
  double s0 = 1.0;
  double b = 0.5;
  double c = 0.2;
};
ModelSpec nonlinear_model(const NonlinearModelParams& p, Interval theta, double x0,
                          double horizon);

}  // namespace bsde
