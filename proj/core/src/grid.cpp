#include "bsde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bsde/errors.hpp"

namespace bsde {

TimeGrid::TimeGrid(double t_start, double t_end, std::size_t n_steps)
    : t_start_(t_start), t_end_(t_end), n_steps_(n_steps), h_(0.0) {
  if (n_steps == 0 || !(t_end > t_start) || !std::isfinite(t_start) ||
      !std::isfinite(t_end)) {
    std::ostringstream msg;
    msg << "time grid needs t_end > t_start and n_steps > 0 (got [" << t_start
        << ", " << t_end << "], n_steps=" << n_steps << ")";
    throw Error(ErrorKind::Configuration, msg.str());
  }
  h_ = (t_end - t_start) / static_cast<double>(n_steps);
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = node(k);
  return out;
}

std::optional<std::size_t> TimeGrid::node_index(double t) const noexcept {
  if (!std::isfinite(t)) return std::nullopt;
  const double pos = (t - t_start_) / h_;
  const double rounded = std::round(pos);
  if (rounded < 0.0 || rounded > static_cast<double>(n_steps_)) return std::nullopt;
  if (std::abs(pos - rounded) > 1e-9) return std::nullopt;
  return static_cast<std::size_t>(rounded);
}

std::size_t TimeGrid::require_node(double t, std::string_view what) const {
  if (auto k = node_index(t)) return *k;
  std::ostringstream msg;
  msg << what << " = " << t << " is not a node of the grid [" << t_start_
      << ", " << t_end_ << "] with step " << h_;
  throw Error(ErrorKind::Configuration, msg.str());
}

std::size_t TimeGrid::nearest_node(double t) const noexcept {
  const double pos = std::round((t - t_start_) / h_);
  if (!(pos > 0.0)) return 0;
  return std::min(static_cast<std::size_t>(pos), n_steps_);
}

TimeGrid TimeGrid::slice(std::size_t first, std::size_t last) const {
  if (first >= last || last > n_steps_) {
    throw Error(ErrorKind::Configuration, "invalid grid slice");
  }
  return TimeGrid(node(first), node(last), last - first);
}

Path::Path(TimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw Error(ErrorKind::Configuration,
                "path length " + std::to_string(values_.size()) +
                    " does not match grid size " + std::to_string(grid_.size()));
  }
}

Path::Path(TimeGrid grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

double Path::at_time(double t) const {
  return values_[grid_.require_node(t, "t")];
}

bool Path::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

Path Path::slice(std::size_t first, std::size_t last) const {
  TimeGrid sub = grid_.slice(first, last);
  return Path(sub, std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(first),
                                       values_.begin() + static_cast<std::ptrdiff_t>(last) + 1));
}

double trapezoid(std::span<const double> f, double h, std::size_t last) {
  if (last == 0) return 0.0;
  double sum = 0.5 * (f[0] + f[last]);
  for (std::size_t k = 1; k < last; ++k) sum += f[k];
  return sum * h;
}

std::vector<double> cumulative_trapezoid(std::span<const double> f, double h) {
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t k = 1; k < f.size(); ++k) {
    out[k] = out[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
  }
  return out;
}

}  // namespace bsde
