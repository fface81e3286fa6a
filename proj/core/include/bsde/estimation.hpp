#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "bsde/grid.hpp"
#include "bsde/model.hpp"
#include "bsde/numerics.hpp"

namespace bsde {

inline constexpr double kDefaultFisherFloor = 1e-10;

// Pilot window [0, delta] and the times at which one-step estimates are
// reported. Both must sit on the observation grid.
struct EstimationWindow {
  double delta = 0.1;
  std::vector<double> t_eval;

  // Throws ErrorKind::Configuration naming `delta` or `t_eval`.
  void validate(const TimeGrid& grid) const;
};

// Minimum-distance pilot: argmin over closure(Theta) of the trapezoidal
// L2 distance between X and x(theta) on [0, delta].
double mde_estimate(const Path& X, const ModelSpec& model, double delta,
                    const MinimizeOptions& options = {});

// I(theta, x^t) = int_0^t Sdot(theta, s, x_s)^2 / sigma(s, x_s)^2 ds along
// `path` (deterministic x(theta) or the observed X).
double fisher_information(const ModelSpec& model, double theta, const Path& path, double t,
                          double floor = kDefaultFisherFloor);

// B(theta, s, x) = Sdot / sigma^2 and its analytic x-derivative.
double score_weight(const ModelSpec& model, double theta, double s, double x);
double score_weight_dx(const ModelSpec& model, double theta, double s, double x);

// A(theta, s, x) = int_{x0}^{x} B(theta, s, z) dz.
double primitive_A(const ModelSpec& model, double theta, double s, double x);

// Delta_t = int_delta^t B(theta, s, X_s) [dX_s - S(theta, s, X_s) ds] as an
// Ito (left-point) sum.
double delta_tail(const ModelSpec& model, double theta, const Path& X, double delta,
                  double t);

// The pilot-window score rewritten without a stochastic integral:
//   A(delta, X_delta) - int A'_s ds - eps^2/2 int B'_x sigma^2 ds
//   - int Sdot S / sigma^2 ds.
double delta_head(const ModelSpec& model, double theta, const Path& X, double delta,
                  double epsilon);

struct OneStepResult {
  double theta = 0.0;      // clamped into closure(Theta)
  double unclamped = 0.0;
  bool clamped = false;
  double fisher = 0.0;     // I(theta*, x^t(theta*))
  double delta_tail = 0.0;
  double delta_head = 0.0;
};

// Precomputes everything the one-step correction needs along one observed
// path so that every grid node t >= delta costs O(1).
class OneStepEstimator {
 public:
  OneStepEstimator(const ModelSpec& model, double theta_pilot, const Path& X, double delta,
                   double epsilon, double fisher_floor = kDefaultFisherFloor);

  // Estimate at grid node k (k >= delta_index()).
  OneStepResult at(std::size_t k) const;
  OneStepResult at_time(double t) const;

  std::size_t delta_index() const noexcept { return delta_index_; }
  double theta_pilot() const noexcept { return theta_pilot_; }
  double head() const noexcept { return head_; }
  const TimeGrid& grid() const noexcept { return grid_; }

 private:
  Interval theta_interval_;
  TimeGrid grid_;
  double theta_pilot_;
  double fisher_floor_;
  std::size_t delta_index_;
  double head_;
  std::vector<double> fisher_;  // running I along x(theta*)
  std::vector<double> tail_;    // running Delta_t from delta
};

// theta~ = theta* + (Delta_t + Delta_delta) / I(theta*, x^t(theta*)).
OneStepResult one_step_mle(const ModelSpec& model, double theta_pilot, const Path& X,
                           double delta, double t, double epsilon,
                           double fisher_floor = kDefaultFisherFloor);

// Maximizer of the discretized log-likelihood on [0, t]; comparator only.
double full_mle(const ModelSpec& model, const Path& X, double t, double epsilon,
                const MinimizeOptions& options = {});

// Limit variance of (theta* - theta0) / eps for the pilot on [0, delta]:
//   int_0^delta sigma^2/psi^2 (int_s^delta psi xdot dv)^2 ds / (int xdot^2)^2
// with psi_t = exp(int_0^t S'_x ds).
double mde_asymptotic_variance(const ModelSpec& model, double theta, double delta,
                               std::size_t n_steps = 4000);

// xi_t = I(theta0, x^t)^{-1} int_0^t Sdot/sigma (theta0, s, x_s) dW_s along the
// limit path, left-point sum on W's grid.
double xi_limit(const ModelSpec& model, double theta0, const Path& W, double t,
                double fisher_floor = kDefaultFisherFloor);
// xi at every node of W's grid; nodes with I below the floor hold NaN.
Path xi_limit_path(const ModelSpec& model, double theta0, const Path& W,
                   double fisher_floor = kDefaultFisherFloor);

struct TraceRow {
  double t = 0.0;
  double theta_onestep = 0.0;
  double fisher = 0.0;
  double delta_tail = 0.0;
  bool clamped = false;
};

struct EstimateTrace {
  double theta_pilot = 0.0;
  double delta_head = 0.0;
  std::vector<TraceRow> rows;
};

EstimateTrace make_trace(const OneStepEstimator& estimator, const std::vector<double>& times);
// Columns: t, theta_onestep, fisher, delta_tail.
void write_trace_csv(std::ostream& out, const EstimateTrace& trace);

}  // namespace bsde
