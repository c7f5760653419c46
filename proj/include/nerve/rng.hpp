#pragma once

#include <cstdint>
#include <random>

namespace nerve {

/// Seeded generator with a fixed, portable algorithm. std::mt19937_64's
/// output sequence is pinned by the standard; the distributions built on
/// top of it here are implemented locally, because the standard library's
/// distributions differ between vendors.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller; caches the second variate.
  double normal();

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Combines a base seed with a stream identifier (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace nerve
