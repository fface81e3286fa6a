#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bsde {

// Adaptive Simpson quadrature of f over [a, b] (a > b allowed) to absolute
// tolerance `tol`. Throws ErrorKind::Quadrature when max_depth is exhausted.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-10, int max_depth = 48);

struct ScalarMinimum {
  double argmin = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

struct MinimizeOptions {
  std::size_t scan_points = 64;
  double relative_tolerance = 1e-8;  // of the interval width
  // Relative spread of the scanned values below which the objective is flat.
  double flat_tolerance = 1e-13;
};

// Minimizes f over [lo, hi]: a uniform scan locates the best cell, golden
// section refines it, and a final three-point parabolic step is accepted
// only if it stays within the golden-section uncertainty and does not
// increase f. Throws ErrorKind::FlatObjective when the scan is constant.
ScalarMinimum minimize_scalar(const std::function<double(double)>& f, double lo,
                              double hi, const MinimizeOptions& options = {});

// Gauss-Hermite rule for E[g(Z)], Z ~ N(0,1): nodes z_i and weights w_i
// with sum w_i = 1. Rules are computed once per size and cached.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussHermiteRule& gauss_hermite(std::size_t n);

// Classical fixed-step RK4 for y' = rhs(t, y), returning y at every node of
// t0, t0 + h, ..., t0 + n h. Stops early and reports the first non-finite
// node through `bad_index` (set to n + 1 when all finite).
std::vector<double> rk4_scalar(const std::function<double(double, double)>& rhs,
                               double t0, double y0, double h, std::size_t n,
                               std::size_t& bad_index);

}  // namespace bsde
