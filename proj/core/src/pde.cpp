#include "bsde/pde.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "bsde/errors.hpp"

namespace bsde {

PdeGrid default_pde_grid(const ModelSpec& model, std::size_t n_x, std::size_t n_t) {
  const TimeGrid grid(0.0, model.horizon, 1000);
  double reach = 0.0;
  const std::size_t n_scan = 33;
  for (std::size_t i = 0; i < n_scan; ++i) {
    const double theta = model.theta_interval.lo +
                         model.theta_interval.width() * static_cast<double>(i) /
                             static_cast<double>(n_scan - 1);
    const Path x = solve_limit_ode(model, theta, grid);
    reach = std::max(reach, std::abs(x.back() - model.x0));
  }
  const double half_width = 6.0 * (reach + 1.0);
  return {model.x0 - half_width, model.x0 + half_width, n_x, n_t, model.horizon};
}

PdeProblem linear_pde_problem(const LinearModelSpec& spec) {
  return {spec.forward_model(), spec.driver(), spec.terminal};
}

PdeSolution solve_semilinear_pde(const PdeProblem& problem, double theta, double epsilon,
                                 const PdeGrid& grid, const PdeSolverOptions& options) {
  const ModelSpec& model = problem.model;
  if (grid.n_x < 4 || grid.n_t < 1 || !(grid.x_max > grid.x_min)) {
    throw Error(ErrorKind::Configuration, "PDE grid needs n_x >= 4, n_t >= 1, x_max > x_min");
  }
  if (!(grid.x_min < model.x0 && model.x0 < grid.x_max)) {
    throw Error(ErrorKind::Configuration, "PDE domain must contain x0");
  }
  const std::size_t nx = grid.n_x;
  const double dx = grid.dx();
  const double dt_store = grid.dt();

  // Largest diffusion, advection and reaction rates over the stored lattice.
  double diff_max = 0.0, adv_max = 0.0, react_max = 0.0;
  for (std::size_t j = 0; j <= grid.n_t; ++j) {
    const double t = static_cast<double>(j) * dt_store;
    for (std::size_t i = 0; i < nx; ++i) {
      const double x = grid.x_node(i);
      const double sig = model.diffusion(t, x);
      diff_max = std::max(diff_max, epsilon * epsilon * sig * sig);
      adv_max = std::max(adv_max, std::abs(model.drift(theta, t, x)));
      const double y = problem.terminal.value(x);
      react_max = std::max(react_max, std::abs(problem.driver(t, x, y + 1.0, 0.0) -
                                               problem.driver(t, x, y, 0.0)));
    }
  }
  const double rate = diff_max / (dx * dx) + adv_max / dx + react_max;
  std::size_t substeps = 1;
  auto fits = [&](std::size_t m) {
    const double dt = dt_store / static_cast<double>(m);
    return diff_max * dt / (dx * dx) <= options.max_diffusion_number &&
           rate * dt <= options.max_courant;
  };
  while (!fits(substeps)) {
    substeps *= 2;
    if (substeps * grid.n_t > options.max_total_steps) {
      throw Error(ErrorKind::Stability,
                  "explicit scheme needs more than " + std::to_string(options.max_total_steps) +
                      " time steps");
    }
  }
  // Shrink back to the smallest admissible count between the last two powers.
  if (substeps > 1) {
    std::size_t lo = substeps / 2, hi = substeps;
    while (hi - lo > 1) {
      const std::size_t mid = (lo + hi) / 2;
      (fits(mid) ? hi : lo) = mid;
    }
    substeps = hi;
  }

  PdeSolution sol;
  sol.grid = grid;
  sol.theta = theta;
  sol.epsilon = epsilon;
  sol.substeps = substeps;
  sol.values.assign((grid.n_t + 1) * nx, 0.0);

  std::vector<double> cur(nx), next(nx);
  for (std::size_t i = 0; i < nx; ++i) cur[i] = problem.terminal.value(grid.x_node(i));
  std::copy(cur.begin(), cur.end(), sol.values.begin() + static_cast<std::ptrdiff_t>(grid.n_t * nx));

  const double dt = dt_store / static_cast<double>(substeps);
  for (std::size_t j = grid.n_t; j-- > 0;) {
    for (std::size_t m = 0; m < substeps; ++m) {
      // Values in `cur` live at t_hi; step back to t_hi - dt.
      const double t_hi = static_cast<double>(j) * dt_store +
                          static_cast<double>(substeps - m) * dt;
      for (std::size_t i = 1; i + 1 < nx; ++i) {
        const double x = grid.x_node(i);
        const double sig = model.diffusion(t_hi, x);
        const double diff = epsilon * epsilon * sig * sig;
        const double s = model.drift(theta, t_hi, x);
        const double ux = (cur[i + 1] - cur[i - 1]) / (2.0 * dx);
        const double uxx = (cur[i + 1] - 2.0 * cur[i] + cur[i - 1]) / (dx * dx);
        double adv = ux;
        if (std::abs(s) * dx > diff) {
          adv = s > 0.0 ? (cur[i + 1] - cur[i]) / dx : (cur[i] - cur[i - 1]) / dx;
          sol.upwinded = true;
        }
        const double z = epsilon * sig * ux;
        next[i] = cur[i] + dt * (s * adv + 0.5 * diff * uxx +
                                 problem.driver(t_hi, x, cur[i], z));
      }
      next[0] = 2.0 * next[1] - next[2];
      next[nx - 1] = 2.0 * next[nx - 2] - next[nx - 3];
      std::swap(cur, next);
    }
    for (std::size_t i = 0; i < nx; ++i) {
      if (!std::isfinite(cur[i])) {
        throw Error(ErrorKind::Divergence, "PDE solution became non-finite", j);
      }
    }
    std::copy(cur.begin(), cur.end(), sol.values.begin() + static_cast<std::ptrdiff_t>(j * nx));
  }
  return sol;
}

namespace {

struct Cell {
  std::size_t index;
  double weight;
};

Cell locate(double v, double lo, double step, std::size_t n_intervals) {
  const double pos = (v - lo) / step;
  double base = std::floor(pos);
  if (base >= static_cast<double>(n_intervals)) base = static_cast<double>(n_intervals - 1);
  if (base < 0.0) base = 0.0;
  return {static_cast<std::size_t>(base), pos - base};
}

double node_slope(const PdeSolution& sol, std::size_t j, std::size_t i) {
  const std::size_t nx = sol.grid.n_x;
  const double dx = sol.grid.dx();
  if (i == 0) return (sol.at(j, 1) - sol.at(j, 0)) / dx;
  if (i + 1 == nx) return (sol.at(j, nx - 1) - sol.at(j, nx - 2)) / dx;
  return (sol.at(j, i + 1) - sol.at(j, i - 1)) / (2.0 * dx);
}

}  // namespace

ValueFunction::ValueAndSlope eval_solution(const PdeSolution& sol, double t, double x) {
  const PdeGrid& g = sol.grid;
  if (!(x >= g.x_min && x <= g.x_max) || !(t >= 0.0 && t <= g.horizon)) {
    throw Error(ErrorKind::Domain, "point (t=" + std::to_string(t) + ", x=" +
                                       std::to_string(x) + ") outside the PDE domain");
  }
  const Cell tc = locate(t, 0.0, g.dt(), g.n_t);
  const Cell xc = locate(x, g.x_min, g.dx(), g.n_x - 1);
  auto bilinear = [&](auto&& value) {
    const double v00 = value(tc.index, xc.index);
    const double v01 = value(tc.index, xc.index + 1);
    const double v10 = value(tc.index + 1, xc.index);
    const double v11 = value(tc.index + 1, xc.index + 1);
    const double lo = v00 + xc.weight * (v01 - v00);
    const double hi = v10 + xc.weight * (v11 - v10);
    return lo + tc.weight * (hi - lo);
  };
  return {bilinear([&](std::size_t j, std::size_t i) { return sol.at(j, i); }),
          bilinear([&](std::size_t j, std::size_t i) { return node_slope(sol, j, i); })};
}

void write_solution_csv(std::ostream& out, const PdeSolution& sol, std::size_t x_stride,
                        std::size_t t_stride) {
  x_stride = std::max<std::size_t>(x_stride, 1);
  t_stride = std::max<std::size_t>(t_stride, 1);
  out << "t,x,u\n" << std::setprecision(17);
  for (std::size_t j = 0; j <= sol.grid.n_t; j += t_stride) {
    const double t = j == sol.grid.n_t ? sol.grid.horizon : static_cast<double>(j) * sol.grid.dt();
    for (std::size_t i = 0; i < sol.grid.n_x; i += x_stride) {
      out << t << ',' << sol.grid.x_node(i) << ',' << sol.at(j, i) << '\n';
    }
  }
}

PdeValueFunction::PdeValueFunction(PdeProblem problem, std::vector<PdeSolution> solutions)
    : problem_(std::move(problem)),
      solutions_(std::move(solutions)),
      epsilon_(solutions_.empty() ? 0.0 : solutions_.front().epsilon),
      limit_(problem_.model, problem_.driver, problem_.terminal) {
  if (solutions_.empty()) throw Error(ErrorKind::Configuration, "no PDE solutions supplied");
  std::sort(solutions_.begin(), solutions_.end(),
            [](const PdeSolution& a, const PdeSolution& b) { return a.theta < b.theta; });
  for (const auto& s : solutions_) thetas_.push_back(s.theta);
}

PdeValueFunction::Stencil PdeValueFunction::stencil(double theta) const {
  const std::size_t n = thetas_.size();
  const double span = thetas_.back() - thetas_.front();
  const double slack = 1e-12 * std::max(1.0, span);
  if (theta < thetas_.front() - slack || theta > thetas_.back() + slack) {
    throw Error(ErrorKind::Domain, "theta = " + std::to_string(theta) +
                                       " outside the solved parameter range");
  }
  Stencil s{};
  if (n == 1) {
    s.first = 0;
    s.count = 1;
    s.w[0] = 1.0;
    return s;
  }
  if (n == 2) {
    const double h = thetas_[1] - thetas_[0];
    const double r = (theta - thetas_[0]) / h;
    s = {0, 2, {1.0 - r, r, 0.0}, {-1.0 / h, 1.0 / h, 0.0}, {0.0, 0.0, 0.0}};
    return s;
  }
  // Three nodes centred on the nearest lattice point.
  const auto it = std::lower_bound(thetas_.begin(), thetas_.end(), theta);
  std::size_t nearest = static_cast<std::size_t>(it - thetas_.begin());
  if (nearest == n) nearest = n - 1;
  if (nearest > 0 && std::abs(thetas_[nearest - 1] - theta) < std::abs(thetas_[nearest] - theta)) {
    --nearest;
  }
  const std::size_t first = std::clamp<std::size_t>(nearest, 1, n - 2) - 1;
  const double a = thetas_[first], b = thetas_[first + 1], c = thetas_[first + 2];
  const double x = theta;
  s.first = first;
  s.count = 3;
  const double da = (a - b) * (a - c), db = (b - a) * (b - c), dc = (c - a) * (c - b);
  s.w[0] = (x - b) * (x - c) / da;
  s.w[1] = (x - a) * (x - c) / db;
  s.w[2] = (x - a) * (x - b) / dc;
  s.dw[0] = ((x - b) + (x - c)) / da;
  s.dw[1] = ((x - a) + (x - c)) / db;
  s.dw[2] = ((x - a) + (x - b)) / dc;
  s.d2w[0] = 2.0 / da;
  s.d2w[1] = 2.0 / db;
  s.d2w[2] = 2.0 / dc;
  return s;
}

namespace {

template <class Weights, class Fn>
double combine(const Weights& w, std::size_t first, std::size_t count, Fn&& fn) {
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += w[i] * fn(first + i);
  return acc;
}

}  // namespace

double PdeValueFunction::u(double t, double x, double theta) const {
  return value_and_slope(t, x, theta).u;
}

double PdeValueFunction::u_x(double t, double x, double theta) const {
  return value_and_slope(t, x, theta).u_x;
}

ValueFunction::ValueAndSlope PdeValueFunction::value_and_slope(double t, double x,
                                                               double theta) const {
  if (t == horizon()) return {problem_.terminal.value(x), problem_.terminal.d1(x)};
  const Stencil s = stencil(theta);
  ValueAndSlope out;
  for (std::size_t i = 0; i < s.count; ++i) {
    const auto v = eval_solution(solutions_[s.first + i], t, x);
    out.u += s.w[i] * v.u;
    out.u_x += s.w[i] * v.u_x;
  }
  return out;
}

double PdeValueFunction::u_theta(double t, double x, double theta) const {
  if (t == horizon()) return 0.0;
  const Stencil s = stencil(theta);
  return combine(s.dw, s.first, s.count,
                 [&](std::size_t k) { return eval_solution(solutions_[k], t, x).u; });
}

double PdeValueFunction::u_theta_x(double t, double x, double theta) const {
  if (t == horizon()) return 0.0;
  const Stencil s = stencil(theta);
  return combine(s.dw, s.first, s.count,
                 [&](std::size_t k) { return eval_solution(solutions_[k], t, x).u_x; });
}

double PdeValueFunction::u_thetatheta(double t, double x, double theta) const {
  if (t == horizon()) return 0.0;
  const Stencil s = stencil(theta);
  return combine(s.d2w, s.first, s.count,
                 [&](std::size_t k) { return eval_solution(solutions_[k], t, x).u; });
}

double PdeValueFunction::u0(double t, double x, double theta) const { return limit_.u0(t, x, theta); }
double PdeValueFunction::u0_x(double t, double x, double theta) const { return limit_.u0_x(t, x, theta); }
double PdeValueFunction::u0_theta(double t, double x, double theta) const {
  return limit_.u0_theta(t, x, theta);
}
double PdeValueFunction::u0_theta_x(double t, double x, double theta) const {
  return limit_.u0_theta_x(t, x, theta);
}

PdeValueFunction theta_derivatives_by_bundle(const PdeProblem& problem, const PdeGrid& grid,
                                             double theta, double epsilon, double dtheta,
                                             const PdeSolverOptions& options) {
  if (!(dtheta > 0.0)) dtheta = 1e-3 * problem.model.theta_interval.width();
  std::vector<PdeSolution> bundle;
  for (double th : {theta - dtheta, theta, theta + dtheta}) {
    bundle.push_back(solve_semilinear_pde(problem, th, epsilon, grid, options));
  }
  return PdeValueFunction(problem, std::move(bundle));
}

PdeValueFunction make_pde_value_function(const PdeProblem& problem, const PdeGrid& grid,
                                         double epsilon, std::size_t n_theta,
                                         const PdeSolverOptions& options) {
  n_theta = std::max<std::size_t>(n_theta, 3);
  const Interval& th = problem.model.theta_interval;
  std::vector<PdeSolution> solutions;
  for (std::size_t k = 0; k < n_theta; ++k) {
    const double theta = th.lo + th.width() * static_cast<double>(k) / static_cast<double>(n_theta - 1);
    solutions.push_back(solve_semilinear_pde(problem, theta, epsilon, grid, options));
  }
  return PdeValueFunction(problem, std::move(solutions));
}

}  // namespace bsde
