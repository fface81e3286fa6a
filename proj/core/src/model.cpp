#include "bsde/model.hpp"

#include <cmath>
#include <sstream>

#include "bsde/errors.hpp"
#include "bsde/numerics.hpp"

namespace bsde {

namespace {

double lattice(double lo, double hi, std::size_t i, std::size_t n) {
  if (n <= 1) return 0.5 * (lo + hi);
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

[[noreturn]] void reject(const ModelSpec& model, const std::string& what, double theta,
                         double t, double x) {
  std::ostringstream msg;
  msg << "model '" << model.name << "': " << what << " at theta=" << theta << ", t=" << t
      << ", x=" << x;
  throw Error(ErrorKind::InvalidModel, msg.str());
}

void check_derivative(const ModelSpec& model, const char* field, double analytic,
                      double numeric, double rtol, double theta, double t, double x) {
  if (!std::isfinite(analytic) ||
      std::abs(analytic - numeric) > rtol * std::max(1.0, std::abs(analytic))) {
    std::ostringstream what;
    what << field << " = " << analytic << " disagrees with finite difference " << numeric;
    reject(model, what.str(), theta, t, x);
  }
}

double central(const std::function<double(double)>& f, double v) {
  const double h = 1e-5 * std::max(1.0, std::abs(v));
  return (f(v + h) - f(v - h)) / (2.0 * h);
}

}  // namespace

void validate_model(const ModelSpec& model, const ValidationOptions& opt) {
  if (!model.drift || !model.drift_dtheta || !model.drift_ddtheta || !model.drift_dx ||
      !model.drift_dtheta_dx || !model.diffusion || !model.diffusion_dx) {
    throw Error(ErrorKind::InvalidModel, "model '" + model.name + "' has unset fields");
  }
  if (!(model.theta_interval.hi > model.theta_interval.lo)) {
    throw Error(ErrorKind::InvalidModel, "model '" + model.name + "': empty parameter interval");
  }
  if (!(model.horizon > 0.0) || !(model.kappa > 0.0)) {
    throw Error(ErrorKind::InvalidModel,
                "model '" + model.name + "': horizon and kappa must be positive");
  }
  const Interval& th = model.theta_interval;
  const double L = model.lipschitz;
  for (std::size_t a = 0; a < opt.samples_theta; ++a) {
    // Interior points of the open interval.
    const double theta = th.lo + th.width() * (static_cast<double>(a) + 0.5) /
                                     static_cast<double>(opt.samples_theta);
    for (std::size_t i = 0; i < opt.samples_t; ++i) {
      const double t = lattice(0.0, model.horizon, i, opt.samples_t);
      double prev_x = 0.0, prev_s = 0.0, prev_sig = 0.0;
      for (std::size_t j = 0; j < opt.samples_x; ++j) {
        const double x = lattice(opt.x_min, opt.x_max, j, opt.samples_x);
        const double s = model.drift(theta, t, x);
        const double sig = model.diffusion(t, x);
        if (!(sig * sig >= model.kappa)) reject(model, "sigma^2 below kappa", theta, t, x);
        if (!(std::abs(s) + std::abs(sig) <= L * (1.0 + std::abs(x)))) {
          reject(model, "linear-growth bound violated", theta, t, x);
        }
        if (j > 0) {
          const double lhs = std::abs(s - prev_s) + std::abs(sig - prev_sig);
          if (!(lhs <= L * std::abs(x - prev_x) * (1.0 + 1e-12))) {
            reject(model, "Lipschitz bound violated", theta, t, x);
          }
        }
        prev_x = x;
        prev_s = s;
        prev_sig = sig;

        const double rtol = opt.derivative_rtol;
        check_derivative(model, "drift_dtheta", model.drift_dtheta(theta, t, x),
                         central([&](double v) { return model.drift(v, t, x); }, theta), rtol,
                         theta, t, x);
        check_derivative(model, "drift_ddtheta", model.drift_ddtheta(theta, t, x),
                         central([&](double v) { return model.drift_dtheta(v, t, x); }, theta),
                         rtol, theta, t, x);
        check_derivative(model, "drift_dx", model.drift_dx(theta, t, x),
                         central([&](double v) { return model.drift(theta, t, v); }, x), rtol,
                         theta, t, x);
        check_derivative(model, "drift_dtheta_dx", model.drift_dtheta_dx(theta, t, x),
                         central([&](double v) { return model.drift_dtheta(theta, t, v); }, x),
                         rtol, theta, t, x);
        check_derivative(model, "diffusion_dx", model.diffusion_dx(t, x),
                         central([&](double v) { return model.diffusion(t, v); }, x), rtol,
                         theta, t, x);
      }
    }
  }
}

Path solve_limit_ode(const ModelSpec& model, double theta, const TimeGrid& grid) {
  if (std::abs(grid.t_start()) > 1e-12) {
    throw Error(ErrorKind::Configuration, "limit ODE grid must start at t = 0");
  }
  std::size_t bad = 0;
  auto values = rk4_scalar([&](double t, double x) { return model.drift(theta, t, x); },
                           0.0, model.x0, grid.step(), grid.n_steps(), bad);
  if (bad <= grid.n_steps()) {
    throw Error(ErrorKind::IntegrationDiverged,
                "limit ODE blew up for theta = " + std::to_string(theta), bad);
  }
  return Path(grid, std::move(values));
}

ForwardPaths simulate_forward(const ModelSpec& model, double theta, double epsilon,
                              const TimeGrid& grid, const NoiseSource& noise) {
  if (!(epsilon >= 0.0)) {
    throw Error(ErrorKind::Configuration, "epsilon must be non-negative");
  }
  const std::size_t n = grid.n_steps();
  const double h = grid.step();
  std::vector<double> x(n + 1), w(n + 1);
  x[0] = model.x0;
  w[0] = 0.0;
  const double scale = std::sqrt(h);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid.node(k);
    const double dw = scale * noise.normal(k);
    w[k + 1] = w[k] + dw;
    x[k + 1] = x[k] + model.drift(theta, t, x[k]) * h + epsilon * model.diffusion(t, x[k]) * dw;
    if (!std::isfinite(x[k + 1]) || std::abs(x[k + 1]) > kBlowUpThreshold) {
      throw Error(ErrorKind::SimulationDiverged, "forward path left the finite range", k + 1);
    }
  }
  return {Path(grid, std::move(x)), Path(grid, std::move(w))};
}

Path sensitivity_xdot(const ModelSpec& model, double theta, const TimeGrid& grid) {
  const Path x = solve_limit_ode(model, theta, grid);
  const std::size_t n = grid.size();
  std::vector<double> sx(n), sdot(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = grid.node(k);
    sx[k] = model.drift_dx(theta, t, x[k]);
    sdot[k] = model.drift_dtheta(theta, t, x[k]);
  }
  const auto exponent = cumulative_trapezoid(sx, grid.step());
  std::vector<double> integrand(n);
  for (std::size_t k = 0; k < n; ++k) integrand[k] = std::exp(-exponent[k]) * sdot[k];
  const auto inner = cumulative_trapezoid(integrand, grid.step());
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = std::exp(exponent[k]) * inner[k];
    if (!std::isfinite(out[k])) {
      throw Error(ErrorKind::IntegrationDiverged, "sensitivity overflowed", k);
    }
  }
  return Path(grid, std::move(out));
}

ModelSpec constant_drift_model(double sigma, Interval theta, double x0, double horizon) {
  ModelSpec m;
  m.name = "linear-constant-drift";
  m.drift = [](double th, double, double) { return th; };
  m.drift_dtheta = [](double, double, double) { return 1.0; };
  m.drift_ddtheta = [](double, double, double) { return 0.0; };
  m.drift_dx = [](double, double, double) { return 0.0; };
  m.drift_dtheta_dx = [](double, double, double) { return 0.0; };
  m.diffusion = [sigma](double, double) { return sigma; };
  m.diffusion_dx = [](double, double) { return 0.0; };
  m.theta_interval = theta;
  m.x0 = x0;
  m.horizon = horizon;
  m.kappa = 0.5 * sigma * sigma;
  m.lipschitz = std::max({std::abs(theta.lo), std::abs(theta.hi)}) + std::abs(sigma) + 1.0;
  return m;
}

ModelSpec ou_model(double sigma, Interval theta, double x0, double horizon) {
  ModelSpec m;
  m.name = "linear-ou";
  m.drift = [](double th, double, double x) { return th * x; };
  m.drift_dtheta = [](double, double, double x) { return x; };
  m.drift_ddtheta = [](double, double, double) { return 0.0; };
  m.drift_dx = [](double th, double, double) { return th; };
  m.drift_dtheta_dx = [](double, double, double) { return 1.0; };
  m.diffusion = [sigma](double, double) { return sigma; };
  m.diffusion_dx = [](double, double) { return 0.0; };
  m.theta_interval = theta;
  m.x0 = x0;
  m.horizon = horizon;
  m.kappa = 0.5 * sigma * sigma;
  m.lipschitz = std::max({std::abs(theta.lo), std::abs(theta.hi)}) + std::abs(sigma) + 1.0;
  return m;
}

ModelSpec nonlinear_model(const NonlinearModelParams& p, Interval theta, double x0,
                          double horizon) {
  ModelSpec m;
  m.name = "custom-pde";
  m.drift = [p](double th, double, double x) { return th * (1.0 + p.a * std::sin(x)) - p.lambda * x; };
  m.drift_dtheta = [p](double, double, double x) { return 1.0 + p.a * std::sin(x); };
  m.drift_ddtheta = [](double, double, double) { return 0.0; };
  m.drift_dx = [p](double th, double, double x) { return th * p.a * std::cos(x) - p.lambda; };
  m.drift_dtheta_dx = [p](double, double, double x) { return p.a * std::cos(x); };
  m.diffusion = [p](double t, double x) {
    const double s = std::sin(x);
    return p.s0 * (1.0 + p.b * t) * (1.0 + p.c * s * s);
  };
  m.diffusion_dx = [p](double t, double x) {
    return p.s0 * (1.0 + p.b * t) * p.c * std::sin(2.0 * x);
  };
  m.theta_interval = theta;
  m.x0 = x0;
  m.horizon = horizon;
  m.kappa = 0.5 * p.s0 * p.s0;
  const double theta_max = std::max(std::abs(theta.lo), std::abs(theta.hi));
  m.lipschitz = theta_max * (1.0 + std::abs(p.a)) + std::abs(p.lambda) +
                std::abs(p.s0) * (1.0 + std::abs(p.b) * horizon) * (1.0 + std::abs(p.c)) + 1.0;
  return m;
}

}  // namespace bsde
