#pragma once

#include <cstdint>
#include <random>

namespace sysid::rng {

/// splitmix64 finalizer. Used to derive independent stream seeds from
/// (master seed, replicate index, trajectory index) tuples so that serial
/// and parallel runs consume identical randomness.
std::uint64_t mix(std::uint64_t x);

/// Seed for the substream `index` of the stream identified by `seed`.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

/// A deterministic random stream. The generator (mt19937_64) and all
/// variate transforms are pinned here rather than delegated to
/// std::*_distribution, whose output is implementation-defined.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on (0, 1].
  double uniform01();

  /// Standard normal via Box-Muller (pairs cached).
  double normal();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

/// Stream for trajectory `trajectory` of replicate `replicate` under `master`.
Stream trajectory_stream(std::uint64_t master, std::uint64_t replicate,
                         std::uint64_t trajectory);

}  // namespace sysid::rng
