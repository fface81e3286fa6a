#include "bsde/random.hpp"

#include <cmath>
#include <numbers>

namespace bsde {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

double to_unit_interval(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

double NoiseSource::normal(std::uint64_t k) const noexcept {
  // One Philox block yields two Box-Muller normals: steps 2j and 2j+1.
  const std::uint64_t block = k >> 1;
  const Philox4x32::Counter ctr = {
      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
      static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)};
  const Philox4x32::Key key = {static_cast<std::uint32_t>(seed),
                               static_cast<std::uint32_t>(seed >> 32)};
  const auto out = Philox4x32::generate(ctr, key);
  const double u1 = to_unit_interval((static_cast<std::uint64_t>(out[0]) << 32) | out[1]);
  const double u2 = to_unit_interval((static_cast<std::uint64_t>(out[2]) << 32) | out[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (k & 1u) ? radius * std::sin(angle) : radius * std::cos(angle);
}

std::vector<double> NoiseSource::brownian_increments(const TimeGrid& grid) const {
  const double scale = std::sqrt(grid.step());
  std::vector<double> dw(grid.n_steps());
  for (std::size_t k = 0; k < dw.size(); ++k) dw[k] = scale * normal(k);
  return dw;
}

}  // namespace bsde
