#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "bsde/model.hpp"
#include "bsde/value_function.hpp"

namespace bsde {

// Truncated spatial domain and the stored time lattice of a PDE solve.
// n_t counts stored time intervals; the solver sub-steps each of them as
// often as stability requires.
struct PdeGrid {
  double x_min = -1.0;
  double x_max = 1.0;
  std::size_t n_x = 400;
  std::size_t n_t = 200;
  double horizon = 1.0;

  double dx() const noexcept { return (x_max - x_min) / static_cast<double>(n_x - 1); }
  double dt() const noexcept { return horizon / static_cast<double>(n_t); }
  double x_node(std::size_t i) const noexcept {
    return i + 1 == n_x ? x_max : x_min + static_cast<double>(i) * dx();
  }
};

// [x0 - 6 L, x0 + 6 L] with L = max over Theta of |x_T(theta) - x0| + 1.
PdeGrid default_pde_grid(const ModelSpec& model, std::size_t n_x = 400, std::size_t n_t = 200);

struct PdeProblem {
  ModelSpec model;
  Driver driver;
  TerminalFunction terminal;
};

PdeProblem linear_pde_problem(const LinearModelSpec& spec);

struct PdeSolution {
  PdeGrid grid;
  std::vector<double> values;  // row-major [time index][x index]
  double theta = 0.0;
  double epsilon = 0.0;
  std::size_t substeps = 1;    // explicit steps per stored interval
  bool upwinded = false;       // any node used the upwind stencil

  double at(std::size_t time_index, std::size_t x_index) const noexcept {
    return values[time_index * grid.n_x + x_index];
  }
};

struct PdeSolverOptions {
  double max_diffusion_number = 0.45;  // eps^2 sigma^2 dt / dx^2
  double max_courant = 0.9;            // dt (eps^2 sigma^2 / dx^2 + |S| / dx + |f_y|)
  std::size_t max_total_steps = 20'000'000;
};

// Explicit backward sweep of
//   u_t + S u_x + eps^2 sigma^2 / 2 u_xx = -f(t, x, u, eps sigma u_x),
//   u(T, x) = Phi(x),
// with central differences, upwind advection where |S| dx > eps^2 sigma^2,
// and linear extension at both boundaries.
PdeSolution solve_semilinear_pde(const PdeProblem& problem, double theta, double epsilon,
                                 const PdeGrid& grid, const PdeSolverOptions& options = {});

// Bilinear u; u_x from node-centred differences, then bilinear.
ValueFunction::ValueAndSlope eval_solution(const PdeSolution& sol, double t, double x);

// Columns: t, x, u.
void write_solution_csv(std::ostream& out, const PdeSolution& sol, std::size_t x_stride = 1,
                        std::size_t t_stride = 1);

// Value function backed by PDE solutions on an ascending theta lattice;
// theta-dependence by local quadratic interpolation through the three
// nearest solutions. u0 accessors come from characteristics.
class PdeValueFunction final : public ValueFunction {
 public:
  PdeValueFunction(PdeProblem problem, std::vector<PdeSolution> solutions);

  double epsilon() const override { return epsilon_; }
  double horizon() const override { return problem_.model.horizon; }
  double terminal(double x) const override { return problem_.terminal.value(x); }

  double u(double t, double x, double theta) const override;
  double u_x(double t, double x, double theta) const override;
  double u_theta(double t, double x, double theta) const override;
  double u_theta_x(double t, double x, double theta) const override;
  double u_thetatheta(double t, double x, double theta) const override;
  double u0(double t, double x, double theta) const override;
  double u0_x(double t, double x, double theta) const override;
  double u0_theta(double t, double x, double theta) const override;
  double u0_theta_x(double t, double x, double theta) const override;
  ValueAndSlope value_and_slope(double t, double x, double theta) const override;

  const std::vector<PdeSolution>& solutions() const noexcept { return solutions_; }

 private:
  struct Stencil {
    std::size_t first;
    std::size_t count;
    double w[3];    // interpolation weights
    double dw[3];   // first-derivative weights
    double d2w[3];  // second-derivative weights
  };
  Stencil stencil(double theta) const;

  PdeProblem problem_;
  std::vector<PdeSolution> solutions_;
  std::vector<double> thetas_;
  double epsilon_;
  CharacteristicLimit limit_;
};

// Solutions at theta - dtheta, theta, theta + dtheta; theta-derivatives are
// the central differences of the bundle. dtheta <= 0 selects 1e-3 |Theta|.
PdeValueFunction theta_derivatives_by_bundle(const PdeProblem& problem, const PdeGrid& grid,
                                             double theta, double epsilon, double dtheta = 0.0,
                                             const PdeSolverOptions& options = {});

// Solutions on n_theta uniformly spaced points of closure(Theta).
PdeValueFunction make_pde_value_function(const PdeProblem& problem, const PdeGrid& grid,
                                         double epsilon, std::size_t n_theta = 17,
                                         const PdeSolverOptions& options = {});

}  // namespace bsde
