#pragma once

#include "wdmturbo/waveform.hpp"

namespace wdmturbo {

struct NlmsConfig {
  int n_taps = 13;  // at T/2 spacing, odd
  double step_size = 0.05;
  double leakage = 0.0;
  double epsilon = 1e-6;
  /// Leading FEC blocks whose data symbols are used as training.
  int training_blocks = 3;
  int training_passes = 3;
  double divergence_ratio = 10.0;
};

/// 2x2 tap set; taps[out][in] is applied as w^H r.
struct NlmsState {
  NlmsConfig cfg;
  DualPol<DualPol<CVec>> taps;

  /// Center taps of xx and yy at 1, everything else 0.
  static NlmsState initial(const NlmsConfig& cfg);
};

struct NlmsResult {
  DualPol<CVec> symbols;  // one per frame instant
  NlmsState state;
  long alignment = 0;     // symbol offset found by pilot correlation
  RVec pilot_mse;         // |e|^2 summed over pols, per pilot update after training
};

/// Fractionally spaced (2 samples/symbol) MIMO NLMS equalizer. Filtering is
/// circular over the received block. Taps adapt on every instant of the
/// training blocks, then at pilot instants only. Throws if the output
/// power exceeds divergence_ratio times the input power.
NlmsResult nlms_equalize(const DualPolSignal& signal, const SymbolFrame& frame, NlmsState state);

/// Symbol offset maximizing the pilot cross-correlation of the even samples.
long coarse_alignment(const DualPolSignal& signal, const SymbolFrame& frame);

struct DdpllConfig {
  double bandwidth = 1e-3;  // noise bandwidth, fraction of the symbol rate
  double damping = 1.0;
  int acquisition_pilots = 16;
  int slip_window = 32;  // pilots averaged by the slip detector
};

struct DdpllResult {
  DualPol<CVec> symbols;
  DualPol<RVec> phase;
  int cycle_slips = 0;
};

/// Second-order decision-directed PLL per polarization. Pilot instants use
/// the known pilot as reference; data instants use the nearest point.
DdpllResult ddpll(const DualPol<CVec>& symbols, const SymbolFrame& frame, const Constellation& c,
                  const DdpllConfig& cfg = {});

/// Per-pol complex gain fitted by least squares on the pilots, divided out.
DualPol<CVec> pilot_gain_correct(const DualPol<CVec>& symbols, const SymbolFrame& frame);

}  // namespace wdmturbo
