#pragma once

#include <filesystem>
#include <span>

#include "wdmturbo/constellation.hpp"
#include "wdmturbo/types.hpp"

namespace wdmturbo {

/// Sampled dual-polarization complex envelope.
struct DualPolSignal {
  CVec x, y;
  double sample_rate = 0.0;         // Hz
  double center_freq_offset = 0.0;  // Hz, relative to the WDM grid center

  std::size_t size() const { return x.size(); }
  CVec& pol(int p) { return p == 0 ? x : y; }
  const CVec& pol(int p) const { return p == 0 ? x : y; }
  /// Mean of |x|^2 + |y|^2 over samples.
  double mean_power() const;
  void validate() const;
};

/// Dual-pol symbol sequence with co-located pilots.
struct SymbolFrame {
  DualPol<CVec> symbols;
  DualPol<std::vector<std::size_t>> labels;
  std::vector<std::uint8_t> pilot_mask;      // per instant, shared by both pols
  std::vector<std::size_t> data_instants;    // data ordinal -> instant
  std::vector<int> block_index;              // FEC block per instant
  int bits_per_symbol = 0;
  std::size_t n_blocks = 0;
  std::size_t pilot_stride = 0;              // 0 when there are no pilots

  std::size_t instants() const { return pilot_mask.size(); }
  std::size_t data_count() const { return data_instants.size(); }
  bool is_pilot(std::size_t i) const { return pilot_mask[i] != 0; }
};

/// Maps interleaved coded bits (n_blocks blocks back to back, per pol) to
/// symbols and inserts a pilot at every ceil(1/pilot_rate)-th instant,
/// starting at instant 0. Pilot symbols are drawn uniformly from the
/// constellation with `seed`. The frame is the shortest one holding all data.
SymbolFrame build_frame(const DualPol<Bits>& coded_bits, const Constellation& c, double pilot_rate,
                        std::size_t n_blocks, std::uint64_t seed);

/// Bits carried by the data instants of one polarization (inverse of build_frame).
Bits extract_data_bits(const SymbolFrame& frame, int pol, const Constellation& c);

/// Pilot spacing used by build_frame for a given rate (0 means no pilots).
std::size_t pilot_stride_for(double pilot_rate);

struct PulseShape {
  double symbol_rate = 32e9;
  double rolloff = 0.01;
  int span_symbols = 64;
};

/// Root-raised-cosine frequency response (unit passband) at frequency f.
double rrc_response(double f, double symbol_rate, double rolloff);

/// Upsamples the frame to `samples_per_symbol` and applies the RRC filter.
/// Filtering is circular over the block; `total_symbols` > instants() pads the
/// sequence with zero symbols. Unit-energy symbols give unit mean power per pol.
DualPolSignal rrc_shape(const SymbolFrame& frame, int samples_per_symbol, const PulseShape& pulse,
                        std::size_t total_symbols = 0);
DualPolSignal rrc_shape(const DualPol<CVec>& symbols, int samples_per_symbol, const PulseShape& pulse,
                        std::size_t total_symbols = 0);

/// RRC matched filter at the signal's own rate; shape -> match -> take
/// every sps-th sample returns the symbols.
DualPolSignal matched_filter(const DualPolSignal& signal, const PulseShape& pulse);

/// Every `factor`-th sample starting at `phase`.
DualPol<CVec> downsample(const DualPolSignal& signal, int factor, int phase = 0);

/// Spectral resampling; new_rate * size / sample_rate must be an integer.
DualPolSignal resample(const DualPolSignal& signal, double new_rate);

/// Frequency-shifts channel k to (k - (n-1)/2) * spacing and sums. Offsets are
/// rounded to the FFT bin grid so each carrier stays periodic over the block.
/// Throws when (n-1)*spacing + channel_bandwidth exceeds the sample rate.
DualPolSignal wdm_mux(std::span<const DualPolSignal> channels, double spacing_hz, double channel_bandwidth_hz);

/// Brick-wall band-pass of width bandwidth_hz around offset_hz, downconverted
/// to baseband and resampled to out_rate.
DualPolSignal select_channel(const DualPolSignal& signal, double offset_hz, double bandwidth_hz, double out_rate);

/// Waveform dump: little-endian float32 (xRe, xIm, yRe, yIm) per sample in
/// `path`, JSON sidecar {"sample_rate", "length", "center_freq_offset"} in
/// path + ".json".
void write_waveform(const DualPolSignal& signal, const std::filesystem::path& path);
DualPolSignal read_waveform(const std::filesystem::path& path);

}  // namespace wdmturbo
