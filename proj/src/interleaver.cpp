#include <numeric>
#include <stdexcept>
#include <string>

#include "wdmturbo/fec.hpp"
#include "wdmturbo/random.hpp"

namespace wdmturbo {

Interleaver::Interleaver(std::size_t n, std::uint64_t seed) : perm_(n), seed_(seed) {
  std::iota(perm_.begin(), perm_.end(), 0U);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.index(i));
    std::swap(perm_[i - 1], perm_[j]);
  }
}

Interleaver::Interleaver(std::vector<std::uint32_t> permutation) : perm_(std::move(permutation)) {
  std::vector<std::uint8_t> seen(perm_.size(), 0);
  for (auto p : perm_) {
    if (p >= perm_.size() || seen[p]) throw std::invalid_argument("Interleaver: not a permutation");
    seen[p] = 1;
  }
}

Interleaver Interleaver::identity(std::size_t n) {
  std::vector<std::uint32_t> p(n);
  std::iota(p.begin(), p.end(), 0U);
  return Interleaver(std::move(p));
}

void Interleaver::check(std::size_t len) const {
  if (len != perm_.size())
    throw std::invalid_argument("interleaver length " + std::to_string(perm_.size()) + " does not match input " +
                                std::to_string(len));
}

}  // namespace wdmturbo
