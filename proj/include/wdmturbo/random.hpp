#pragma once

#include <cstdint>
#include <random>

#include "wdmturbo/types.hpp"

namespace wdmturbo {

/// mt19937_64 plus distribution helpers whose output is fixed by this code
/// rather than by the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform integer in [0, bound), bound > 0, rejection sampled.
  std::uint64_t index(std::uint64_t bound);
  /// Uniform double in [0, 1).
  double uniform();
  /// Standard normal (polar Box-Muller).
  double gaussian();
  /// Circular complex Gaussian with E|z|^2 = variance.
  Complex complex_gaussian(double variance);
  Bits bits(std::size_t count);

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Order-independent seed mixing (splitmix64 finalizer chained over values).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value);
std::uint64_t mix_seed(std::uint64_t seed, double value);

}  // namespace wdmturbo
