#include "sysid/rng.hpp"

#include <cmath>
#include <numbers>

namespace sysid::rng {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return mix(mix(seed) ^ mix(index + 0x51ED270B0A1FULL));
}

double Stream::uniform01() {
  // 53-bit mantissa, shifted into (0, 1].
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Stream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

double Stream::uniform(double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53);
}

Stream trajectory_stream(std::uint64_t master, std::uint64_t replicate,
                         std::uint64_t trajectory) {
  return Stream(substream_seed(substream_seed(master, replicate), trajectory));
}

}  // namespace sysid::rng
