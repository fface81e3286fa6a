#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace bsde {

// Uniform grid t_start = t_0 < t_1 < ... < t_n = t_end.
class TimeGrid {
 public:
  TimeGrid(double t_start, double t_end, std::size_t n_steps);

  double t_start() const noexcept { return t_start_; }
  double t_end() const noexcept { return t_end_; }
  std::size_t n_steps() const noexcept { return n_steps_; }
  std::size_t size() const noexcept { return n_steps_ + 1; }
  double step() const noexcept { return h_; }

  double node(std::size_t k) const noexcept {
    return k == n_steps_ ? t_end_ : t_start_ + static_cast<double>(k) * h_;
  }
  std::vector<double> nodes() const;

  // Index of the node equal to t (within a relative 1e-9 of h), if any.
  std::optional<std::size_t> node_index(double t) const noexcept;
  // As node_index, but throws a Configuration error naming `what`.
  std::size_t require_node(double t, std::string_view what) const;
  // Index of the node nearest to t, clamped to the grid.
  std::size_t nearest_node(double t) const noexcept;

  // Sub-grid covering nodes [first, last] of this grid.
  TimeGrid slice(std::size_t first, std::size_t last) const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double t_start_;
  double t_end_;
  std::size_t n_steps_;
  double h_;
};

// A trajectory sampled on every node of a TimeGrid.
class Path {
 public:
  Path(TimeGrid grid, std::vector<double> values);
  explicit Path(TimeGrid grid, double fill = 0.0);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator[](std::size_t k) const noexcept { return values_[k]; }
  double& operator[](std::size_t k) noexcept { return values_[k]; }
  double at_time(double t) const;  // t must be a node
  double back() const noexcept { return values_.back(); }

  bool all_finite() const noexcept;
  // Copy of nodes [first, last].
  Path slice(std::size_t first, std::size_t last) const;

 private:
  TimeGrid grid_;
  std::vector<double> values_;
};

// Trapezoidal rule over nodes [0, last] of a uniformly spaced sample.
double trapezoid(std::span<const double> f, double h, std::size_t last);
// Running trapezoid integral: out[k] = integral over nodes [0, k].
std::vector<double> cumulative_trapezoid(std::span<const double> f, double h);

}  // namespace bsde
