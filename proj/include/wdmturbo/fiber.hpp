#pragma once

#include <cstdint>

#include "wdmturbo/waveform.hpp"

namespace wdmturbo {

struct FiberParams {
  double alpha_db_per_km = 0.2;
  double gamma_per_w_km = 1.3;
  double dispersion_ps_nm_km = 17.0;
  double span_km = 50.0;
  int n_spans = 1;
  double nf_db = 4.5;
  double step_m = 100.0;
  double center_wavelength_nm = 1550.0;

  /// Throws on negative loss/nonlinearity, non-positive lengths or a step
  /// longer than the span.
  void validate() const;
  /// Group-velocity dispersion in s^2/m.
  double beta2() const;
  /// Power attenuation coefficient in 1/m (power decays as exp(-alpha z)).
  double alpha_per_m() const;
  double gamma_per_w_m() const { return gamma_per_w_km * 1e-3; }
  /// Amplifier gain that exactly offsets one span's loss.
  double span_gain_db() const { return alpha_db_per_km * span_km; }
};

/// One span of symmetric split-step Manakov propagation. The signal is in
/// sqrt(W) units; x and y share the (8/9) gamma (|x|^2 + |y|^2) phase.
DualPolSignal propagate_span(const DualPolSignal& signal, const FiberParams& p);

/// Lumped amplifier: field gain sqrt(G) plus circular Gaussian ASE of variance
/// (G - 1) h nu NF / 2 * sample_rate per polarization per sample.
/// nf_db = -infinity switches the noise off.
DualPolSignal amplify(const DualPolSignal& signal, double gain_db, double nf_db, std::uint64_t seed,
                      double wavelength_nm = 1550.0);

/// All-pass removal of the dispersion accumulated over distance_km.
DualPolSignal edc(const DualPolSignal& signal, const FiberParams& p, double distance_km);

/// Backward split-step over distance_km in spans of p.span_km, undoing the
/// span-loss-compensating amplifier before each span.
DualPolSignal dbp(const DualPolSignal& signal, const FiberParams& p, double distance_km, double step_m);

namespace reference {
/// Unmerged symmetric SSFM (two FFT pairs per step) for cross-checking.
DualPolSignal propagate_span_unmerged(const DualPolSignal& signal, const FiberParams& p);
}  // namespace reference

}  // namespace wdmturbo
