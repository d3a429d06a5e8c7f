#pragma once

#include <span>
#include <string>

#include "wdmturbo/types.hpp"

namespace wdmturbo {

/// Square QAM with reflected-binary Gray labeling per axis.
///
/// Points are stored indexed by their label: point j carries the q-bit label
/// whose bit l (l = 0 is the most significant) is (j >> (q - 1 - l)) & 1.
/// The first q/2 bits select the in-phase level, the last q/2 the quadrature
/// level, and bit value 1 maps to the positive half of its axis.
class Constellation {
 public:
  /// M in {4, 16, 64, 256}; unit average energy.
  static Constellation square_qam(int order);
  /// Parses "qpsk", "16qam", "64qam", "256qam" (case-insensitive).
  static Constellation from_name(const std::string& name);

  int order() const { return order_; }
  int bits_per_symbol() const { return bits_; }
  double energy() const { return energy_; }
  std::span<const Complex> points() const { return points_; }
  const Complex& point(std::size_t label) const { return points_[label]; }

  int bit(std::size_t label, int l) const {
    return static_cast<int>((label >> (bits_ - 1 - l)) & 1U);
  }

  /// Label from q bits (MSB first).
  std::size_t label_of(std::span<const std::uint8_t> bits) const;
  /// Nearest point label (per-axis slicing).
  std::size_t slice(Complex z) const;

 private:
  int order_ = 0;
  int bits_ = 0;
  int levels_ = 0;  // per axis
  double scale_ = 1.0;
  double energy_ = 0.0;
  CVec points_;
  std::vector<std::size_t> level_to_gray_;
};

enum class LlrKind { a_priori, extrinsic, a_posteriori };

/// L-values ln P(b=1)/P(b=0), one per coded bit, symbol-major.
struct LlrBlock {
  RVec values;
  LlrKind kind = LlrKind::a_priori;
};

/// Per-instant symbol probabilities, row-major (instants x M).
struct SymbolPriors {
  std::size_t order = 0;
  RVec prob;
  std::size_t instants() const { return order == 0 ? 0 : prob.size() / order; }
  std::span<const double> row(std::size_t i) const {
    return {prob.data() + i * order, order};
  }
};

/// Mean and variance of one polarization's symbols under priors.
struct SoftSymbolStats {
  CVec mean;
  RVec variance;
};

SymbolPriors symbol_priors(const LlrBlock& llrs, const Constellation& c);
SoftSymbolStats soft_stats(const SymbolPriors& priors, const Constellation& c);

/// Equivalent-AWGN channel seen by the demapper: estimate = mu * s + noise,
/// noise ~ CN(0, nu2). Arrays are per symbol instant.
struct EquivalentChannel {
  std::span<const Complex> estimates;
  std::span<const double> mu;
  std::span<const double> nu2;
};

/// Extrinsic bit L-values for every instant of `channel`.
///
/// For bit l the likelihoods p(estimate | s) are weighted by the a priori
/// probabilities of the other q-1 bits of s only; bit l's own prior is left
/// out. Sums are log-sum-exp in the log domain; output is clipped to
/// +-kLlrClip. `priors` may be empty (zero information). nu2 below
/// 1e-9 * energy is raised to that floor; non-positive or non-finite nu2 is
/// rejected.
LlrBlock extrinsic_llrs(const EquivalentChannel& channel, const LlrBlock& priors,
                        const Constellation& c);

namespace reference {
/// Serial version of extrinsic_llrs, same arithmetic per instant.
LlrBlock extrinsic_llrs_serial(const EquivalentChannel& channel,
                               const LlrBlock& priors, const Constellation& c);
}  // namespace reference

/// Symbols (labels) -> bits, q per symbol, MSB first.
Bits labels_to_bits(std::span<const std::size_t> labels, const Constellation& c);

}  // namespace wdmturbo
