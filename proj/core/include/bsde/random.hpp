#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bsde/grid.hpp"

namespace bsde {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
// Stateless: the output is a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

// Identifies one Brownian path. The k-th increment is a pure function of
// (seed, stream_id, k), so replications can run in any order.
struct NoiseSource {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  // k-th standard normal variate of this stream.
  double normal(std::uint64_t k) const noexcept;
  // Increments sqrt(h) * N_k for every step of the grid.
  std::vector<double> brownian_increments(const TimeGrid& grid) const;
};

// Maps a 64-bit word to a double uniformly distributed in (0, 1].
double to_unit_interval(std::uint64_t bits) noexcept;

}  // namespace bsde
