#include "wdmturbo/random.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace wdmturbo {

std::uint64_t Rng::index(std::uint64_t bound) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % bound;
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  have_spare_ = true;
  return u * f;
}

Complex Rng::complex_gaussian(double variance) {
  const double sd = std::sqrt(variance / 2.0);
  const double re = gaussian();
  const double im = gaussian();
  return {sd * re, sd * im};
}

Bits Rng::bits(std::size_t count) {
  Bits out(count);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % 64 == 0) word = engine_();
    out[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1U);
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value) {
  std::uint64_t z = seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, double value) {
  return mix_seed(seed, std::bit_cast<std::uint64_t>(value == 0.0 ? 0.0 : value));
}

}  // namespace wdmturbo
