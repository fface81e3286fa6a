#include "bsde/estimation.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "bsde/errors.hpp"

namespace bsde {

void EstimationWindow::validate(const TimeGrid& grid) const {
  if (!(delta > grid.t_start()) || !(delta < grid.t_end())) {
    std::ostringstream msg;
    msg << "delta = " << delta << " must lie strictly inside (" << grid.t_start() << ", "
        << grid.t_end() << ")";
    throw Error(ErrorKind::Configuration, msg.str());
  }
  grid.require_node(delta, "delta");
  for (double t : t_eval) {
    grid.require_node(t, "t_eval");
    if (t < delta) {
      throw Error(ErrorKind::Configuration,
                  "t_eval = " + std::to_string(t) + " precedes delta");
    }
  }
}

double mde_estimate(const Path& X, const ModelSpec& model, double delta,
                    const MinimizeOptions& options) {
  const TimeGrid& grid = X.grid();
  const std::size_t kd = grid.require_node(delta, "delta");
  if (kd == 0) throw Error(ErrorKind::Configuration, "delta must be positive");
  const TimeGrid window = grid.slice(0, kd);
  std::vector<double> sq(kd + 1);
  auto objective = [&](double theta) {
    const Path x = solve_limit_ode(model, theta, window);
    for (std::size_t k = 0; k <= kd; ++k) {
      const double d = X[k] - x[k];
      sq[k] = d * d;
    }
    return trapezoid(sq, grid.step(), kd);
  };
  return minimize_scalar(objective, model.theta_interval.lo, model.theta_interval.hi, options)
      .argmin;
}

double fisher_information(const ModelSpec& model, double theta, const Path& path, double t,
                          double floor) {
  const TimeGrid& grid = path.grid();
  const std::size_t k = grid.require_node(t, "t");
  std::vector<double> f(k + 1);
  for (std::size_t j = 0; j <= k; ++j) {
    const double s = grid.node(j);
    const double sd = model.drift_dtheta(theta, s, path[j]);
    const double sig = model.diffusion(s, path[j]);
    f[j] = sd * sd / (sig * sig);
  }
  const double info = trapezoid(f, grid.step(), k);
  if (!(info >= floor)) {
    throw Error(ErrorKind::SingularInformation,
                "Fisher information " + std::to_string(info) + " below floor at t = " +
                    std::to_string(t));
  }
  return info;
}

double score_weight(const ModelSpec& model, double theta, double s, double x) {
  const double sig = model.diffusion(s, x);
  return model.drift_dtheta(theta, s, x) / (sig * sig);
}

double score_weight_dx(const ModelSpec& model, double theta, double s, double x) {
  const double sig = model.diffusion(s, x);
  return model.drift_dtheta_dx(theta, s, x) / (sig * sig) -
         2.0 * model.drift_dtheta(theta, s, x) * model.diffusion_dx(s, x) / (sig * sig * sig);
}

double primitive_A(const ModelSpec& model, double theta, double s, double x) {
  if (x == model.x0) return 0.0;
  return adaptive_simpson([&](double z) { return score_weight(model, theta, s, z); },
                          model.x0, x, 1e-10);
}

double delta_tail(const ModelSpec& model, double theta, const Path& X, double delta,
                  double t) {
  const TimeGrid& grid = X.grid();
  const std::size_t kd = grid.require_node(delta, "delta");
  const std::size_t kt = grid.require_node(t, "t");
  if (kt < kd) throw Error(ErrorKind::Configuration, "t must not precede delta");
  const double h = grid.step();
  double sum = 0.0;
  for (std::size_t k = kd; k < kt; ++k) {
    const double s = grid.node(k);
    sum += score_weight(model, theta, s, X[k]) *
           (X[k + 1] - X[k] - model.drift(theta, s, X[k]) * h);
  }
  return sum;
}

double delta_head(const ModelSpec& model, double theta, const Path& X, double delta,
                  double epsilon) {
  const TimeGrid& grid = X.grid();
  const std::size_t kd = grid.require_node(delta, "delta");
  if (kd == 0) throw Error(ErrorKind::Configuration, "delta must be positive");
  const double h = grid.step();
  auto A = [&](double s, double x) { return primitive_A(model, theta, s, x); };

  std::vector<double> a_s(kd + 1), ito(kd + 1), drift_term(kd + 1);
  for (std::size_t k = 0; k <= kd; ++k) {
    const double s = grid.node(k);
    const double x = X[k];
    if (k == 0) {
      // One-sided second-order stencil keeps A evaluated inside [0, T].
      a_s[k] = (-3.0 * A(s, x) + 4.0 * A(s + h, x) - A(s + 2.0 * h, x)) / (2.0 * h);
    } else {
      a_s[k] = (A(s + h, x) - A(s - h, x)) / (2.0 * h);
    }
    const double sig = model.diffusion(s, x);
    ito[k] = score_weight_dx(model, theta, s, x) * sig * sig;
    drift_term[k] = model.drift_dtheta(theta, s, x) * model.drift(theta, s, x) / (sig * sig);
  }
  const double value = A(delta, X[kd]) - trapezoid(a_s, h, kd) -
                       0.5 * epsilon * epsilon * trapezoid(ito, h, kd) -
                       trapezoid(drift_term, h, kd);
  if (!std::isfinite(value)) {
    throw Error(ErrorKind::Quadrature, "pilot-window score is not finite");
  }
  return value;
}

OneStepEstimator::OneStepEstimator(const ModelSpec& model, double theta_pilot, const Path& X,
                                   double delta, double epsilon, double fisher_floor)
    : theta_interval_(model.theta_interval),
      grid_(X.grid()),
      theta_pilot_(theta_pilot),
      fisher_floor_(fisher_floor),
      delta_index_(grid_.require_node(delta, "delta")),
      head_(delta_head(model, theta_pilot, X, delta, epsilon)) {
  const std::size_t n = grid_.size();
  const double h = grid_.step();
  const Path x = solve_limit_ode(model, theta_pilot, grid_);
  std::vector<double> integrand(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = grid_.node(k);
    const double sd = model.drift_dtheta(theta_pilot, s, x[k]);
    const double sig = model.diffusion(s, x[k]);
    integrand[k] = sd * sd / (sig * sig);
  }
  fisher_ = cumulative_trapezoid(integrand, h);
  tail_.assign(n, 0.0);
  for (std::size_t k = delta_index_; k + 1 < n; ++k) {
    const double s = grid_.node(k);
    tail_[k + 1] = tail_[k] + score_weight(model, theta_pilot, s, X[k]) *
                                  (X[k + 1] - X[k] - model.drift(theta_pilot, s, X[k]) * h);
  }
}

OneStepResult OneStepEstimator::at(std::size_t k) const {
  if (k < delta_index_ || k >= grid_.size()) {
    throw Error(ErrorKind::Configuration, "one-step estimate requested outside [delta, T]", k);
  }
  OneStepResult r;
  r.fisher = fisher_[k];
  if (!(r.fisher >= fisher_floor_)) {
    throw Error(ErrorKind::SingularInformation,
                "Fisher information " + std::to_string(r.fisher) + " below floor", k);
  }
  r.delta_tail = tail_[k];
  r.delta_head = head_;
  r.unclamped = theta_pilot_ + (r.delta_tail + r.delta_head) / r.fisher;
  if (!std::isfinite(r.unclamped)) {
    throw Error(ErrorKind::Evaluation, "one-step estimate is not finite", k);
  }
  r.theta = theta_interval_.clamp(r.unclamped);
  r.clamped = r.theta != r.unclamped;
  return r;
}

OneStepResult OneStepEstimator::at_time(double t) const {
  return at(grid_.require_node(t, "t"));
}

OneStepResult one_step_mle(const ModelSpec& model, double theta_pilot, const Path& X,
                           double delta, double t, double epsilon, double fisher_floor) {
  OneStepEstimator est(model, theta_pilot, X, delta, epsilon, fisher_floor);
  return est.at_time(t);
}

double full_mle(const ModelSpec& model, const Path& X, double t, double epsilon,
                const MinimizeOptions& options) {
  const TimeGrid& grid = X.grid();
  const std::size_t kt = grid.require_node(t, "t");
  if (kt == 0) throw Error(ErrorKind::Configuration, "t must be positive");
  const double h = grid.step();
  // eps only rescales the log-likelihood; eps = 0 keeps the unscaled form.
  const double scale = epsilon > 0.0 ? 1.0 / (epsilon * epsilon) : 1.0;
  auto neg_loglik = [&](double theta) {
    double ll = 0.0;
    for (std::size_t k = 0; k < kt; ++k) {
      const double s = grid.node(k);
      const double sig = model.diffusion(s, X[k]);
      const double drift = model.drift(theta, s, X[k]);
      ll += drift * (X[k + 1] - X[k]) / (sig * sig) - 0.5 * drift * drift * h / (sig * sig);
    }
    return -scale * ll;
  };
  return minimize_scalar(neg_loglik, model.theta_interval.lo, model.theta_interval.hi, options)
      .argmin;
}

double mde_asymptotic_variance(const ModelSpec& model, double theta, double delta,
                               std::size_t n_steps) {
  const TimeGrid grid(0.0, delta, n_steps);
  const double h = grid.step();
  const Path x = solve_limit_ode(model, theta, grid);
  const Path xdot = sensitivity_xdot(model, theta, grid);
  const std::size_t n = grid.size();
  std::vector<double> sx(n);
  for (std::size_t k = 0; k < n; ++k) sx[k] = model.drift_dx(theta, grid.node(k), x[k]);
  const auto log_psi = cumulative_trapezoid(sx, h);
  std::vector<double> psi_xdot(n), xdot_sq(n);
  for (std::size_t k = 0; k < n; ++k) {
    psi_xdot[k] = std::exp(log_psi[k]) * xdot[k];
    xdot_sq[k] = xdot[k] * xdot[k];
  }
  const auto running = cumulative_trapezoid(psi_xdot, h);
  std::vector<double> outer(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double inner = running.back() - running[k];
    const double sig = model.diffusion(grid.node(k), x[k]);
    outer[k] = sig * sig * std::exp(-2.0 * log_psi[k]) * inner * inner;
  }
  const double denom = trapezoid(xdot_sq, h, n - 1);
  if (!(denom > kDefaultFisherFloor)) {
    throw Error(ErrorKind::SingularInformation,
                "limit trajectory is insensitive to theta on the pilot window");
  }
  return trapezoid(outer, h, n - 1) / (denom * denom);
}

Path xi_limit_path(const ModelSpec& model, double theta0, const Path& W, double fisher_floor) {
  const TimeGrid& grid = W.grid();
  const Path x = solve_limit_ode(model, theta0, grid);
  const std::size_t n = grid.size();
  std::vector<double> info_integrand(n);
  std::vector<double> stoch(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = grid.node(k);
    const double sd = model.drift_dtheta(theta0, s, x[k]);
    const double sig = model.diffusion(s, x[k]);
    info_integrand[k] = sd * sd / (sig * sig);
    if (k + 1 < n) stoch[k + 1] = stoch[k] + sd / sig * (W[k + 1] - W[k]);
  }
  const auto info = cumulative_trapezoid(info_integrand, grid.step());
  std::vector<double> xi(n);
  for (std::size_t k = 0; k < n; ++k) {
    xi[k] = info[k] >= fisher_floor ? stoch[k] / info[k]
                                    : std::numeric_limits<double>::quiet_NaN();
  }
  return Path(grid, std::move(xi));
}

double xi_limit(const ModelSpec& model, double theta0, const Path& W, double t,
                double fisher_floor) {
  const std::size_t k = W.grid().require_node(t, "t");
  const double value = xi_limit_path(model, theta0, W, fisher_floor)[k];
  if (std::isnan(value)) {
    throw Error(ErrorKind::SingularInformation, "Fisher information below floor", k);
  }
  return value;
}

EstimateTrace make_trace(const OneStepEstimator& estimator, const std::vector<double>& times) {
  EstimateTrace trace;
  trace.theta_pilot = estimator.theta_pilot();
  trace.delta_head = estimator.head();
  for (double t : times) {
    const auto r = estimator.at_time(t);
    trace.rows.push_back({t, r.theta, r.fisher, r.delta_tail, r.clamped});
  }
  return trace;
}

void write_trace_csv(std::ostream& out, const EstimateTrace& trace) {
  out << "t,theta_onestep,fisher,delta_tail\n";
  out << std::setprecision(17);
  for (const auto& row : trace.rows) {
    out << row.t << ',' << row.theta_onestep << ',' << row.fisher << ',' << row.delta_tail
        << '\n';
  }
}

}  // namespace bsde
