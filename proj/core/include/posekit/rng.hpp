#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace posekit {

/// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for the stream of item `index` under a base seed. Work items draw
/// from their own stream so results do not depend on scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Seeded random source with platform-stable distributions.
///
/// The engine is std::mt19937_64 (fully specified by the standard); the
/// distributions are implemented here because the std:: ones are not
/// required to produce the same sequence across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n), unbiased. n must be positive.
  std::size_t uniform_index(std::size_t n);
  /// True with probability p; p <= 0 never fires, p >= 1 always fires.
  bool bernoulli(double p) { return uniform() < p; }
  /// Standard normal via the Box-Muller transform (one value per call).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  Rng split(std::uint64_t index) { return Rng(derive_seed(next_u64(), index)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace posekit
