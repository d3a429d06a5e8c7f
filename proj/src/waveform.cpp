#include "wdmturbo/waveform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "wdmturbo/fft.hpp"
#include "wdmturbo/random.hpp"

namespace wdmturbo {
namespace {

std::size_t exact_ratio(double num, double den, const char* what) {
  const double r = num / den;
  const double rounded = std::round(r);
  if (rounded < 1.0 || std::abs(r - rounded) > 1e-6 * std::max(1.0, r))
    throw std::invalid_argument(std::string(what) + ": resampled length is not an integer");
  return static_cast<std::size_t>(rounded);
}

std::size_t wrap_index(long long idx, std::size_t n) {
  const auto nn = static_cast<long long>(n);
  return static_cast<std::size_t>(((idx % nn) + nn) % nn);
}

void check_pulse(int sps, const PulseShape& pulse) {
  if (sps < 2) throw std::invalid_argument("samples_per_symbol must be >= 2");
  if (!(pulse.rolloff > 0.0 && pulse.rolloff <= 1.0)) throw std::invalid_argument("rolloff must be in (0, 1]");
  if (!(pulse.symbol_rate > 0.0)) throw std::invalid_argument("symbol_rate must be positive");
  if (pulse.span_symbols < 1) throw std::invalid_argument("span_symbols must be positive");
}

}  // namespace

double DualPolSignal::mean_power() const {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += std::norm(x[i]) + std::norm(y[i]);
  return acc / static_cast<double>(x.size());
}

void DualPolSignal::validate() const {
  if (x.size() != y.size()) throw std::invalid_argument("DualPolSignal: polarization lengths differ");
  if (!(sample_rate > 0.0)) throw std::invalid_argument("DualPolSignal: sample_rate must be positive");
}

std::size_t pilot_stride_for(double pilot_rate) {
  if (pilot_rate < 0.0 || pilot_rate > 1.0 || std::isnan(pilot_rate))
    throw std::invalid_argument("pilot_rate must be in [0, 1]");
  if (pilot_rate == 0.0) return 0;
  return static_cast<std::size_t>(std::ceil(1.0 / pilot_rate - 1e-9));
}

SymbolFrame build_frame(const DualPol<Bits>& coded_bits, const Constellation& c, double pilot_rate,
                        std::size_t n_blocks, std::uint64_t seed) {
  const auto q = static_cast<std::size_t>(c.bits_per_symbol());
  const std::size_t total = coded_bits[0].size();
  if (coded_bits[1].size() != total) throw std::invalid_argument("build_frame: polarizations carry different bit counts");
  if (n_blocks == 0 || total == 0 || total % n_blocks != 0)
    throw std::invalid_argument("build_frame: bit count not divisible by block count");
  if (total % q != 0) throw std::invalid_argument("build_frame: bit count not divisible by bits per symbol");

  const std::size_t bits_per_block = total / n_blocks;
  const std::size_t data = total / q;
  const std::size_t stride = pilot_stride_for(pilot_rate);

  if (stride == 1) throw std::invalid_argument("build_frame: pilot_rate 1 leaves no room for data");
  std::size_t instants = data;
  if (stride > 0) {
    auto pilots = [&](std::size_t t) { return (t + stride - 1) / stride; };
    while (instants - pilots(instants) < data) ++instants;
  }

  SymbolFrame f;
  f.bits_per_symbol = static_cast<int>(q);
  f.n_blocks = n_blocks;
  f.pilot_stride = stride;
  f.pilot_mask.assign(instants, 0);
  f.block_index.assign(instants, 0);
  for (int p = 0; p < 2; ++p) {
    f.symbols[p].assign(instants, Complex{});
    f.labels[p].assign(instants, 0);
  }

  Rng rng(seed);
  std::size_t d = 0;
  for (std::size_t i = 0; i < instants; ++i) {
    if (stride > 0 && i % stride == 0) {
      f.pilot_mask[i] = 1;
      for (int p = 0; p < 2; ++p) {
        const auto lab = static_cast<std::size_t>(rng.index(static_cast<std::uint64_t>(c.order())));
        f.labels[p][i] = lab;
        f.symbols[p][i] = c.point(lab);
      }
      continue;
    }
    for (int p = 0; p < 2; ++p) {
      const auto lab = c.label_of(std::span(coded_bits[p]).subspan(d * q, q));
      f.labels[p][i] = lab;
      f.symbols[p][i] = c.point(lab);
    }
    f.data_instants.push_back(i);
    f.block_index[i] = static_cast<int>(d * q / bits_per_block);
    ++d;
  }
  // pilots inherit the block of the following data instant
  int next_block = static_cast<int>(n_blocks) - 1;
  for (std::size_t i = instants; i-- > 0;) {
    if (f.pilot_mask[i]) f.block_index[i] = next_block;
    else next_block = f.block_index[i];
  }
  return f;
}

Bits extract_data_bits(const SymbolFrame& frame, int pol, const Constellation& c) {
  std::vector<std::size_t> labels;
  labels.reserve(frame.data_count());
  for (auto i : frame.data_instants) labels.push_back(frame.labels[pol][i]);
  return labels_to_bits(labels, c);
}

double rrc_response(double f, double symbol_rate, double rolloff) {
  const double af = std::abs(f);
  const double lo = (1.0 - rolloff) * symbol_rate / 2.0;
  const double hi = (1.0 + rolloff) * symbol_rate / 2.0;
  if (af <= lo) return 1.0;
  if (af > hi) return 0.0;
  return std::sqrt(0.5 * (1.0 + std::cos(kPi / (rolloff * symbol_rate) * (af - lo))));
}

DualPolSignal rrc_shape(const DualPol<CVec>& symbols, int sps, const PulseShape& pulse, std::size_t total_symbols) {
  check_pulse(sps, pulse);
  const std::size_t t = symbols[0].size();
  if (symbols[1].size() != t) throw std::invalid_argument("rrc_shape: polarization lengths differ");
  const std::size_t tt = std::max(t, total_symbols);
  const std::size_t n = tt * static_cast<std::size_t>(sps);
  const double fs = pulse.symbol_rate * sps;
  const RVec freq = fft_frequencies(n, fs);

  DualPolSignal out;
  out.sample_rate = fs;
  for (int p = 0; p < 2; ++p) {
    CVec s(tt, Complex{});
    std::copy(symbols[p].begin(), symbols[p].end(), s.begin());
    fft(s);
    CVec& y = out.pol(p);
    y.resize(n);
    for (std::size_t k = 0; k < n; ++k)
      y[k] = s[k % tt] * (static_cast<double>(sps) * rrc_response(freq[k], pulse.symbol_rate, pulse.rolloff));
    ifft(y);
  }
  return out;
}

DualPolSignal rrc_shape(const SymbolFrame& frame, int sps, const PulseShape& pulse, std::size_t total_symbols) {
  return rrc_shape(frame.symbols, sps, pulse, total_symbols);
}

DualPolSignal matched_filter(const DualPolSignal& signal, const PulseShape& pulse) {
  signal.validate();
  const int sps = static_cast<int>(std::lround(signal.sample_rate / pulse.symbol_rate));
  check_pulse(std::max(sps, 2), pulse);
  const RVec freq = fft_frequencies(signal.size(), signal.sample_rate);
  DualPolSignal out = signal;
  for (int p = 0; p < 2; ++p) {
    CVec& y = out.pol(p);
    fft(y);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] *= rrc_response(freq[k], pulse.symbol_rate, pulse.rolloff);
    ifft(y);
  }
  return out;
}

DualPol<CVec> downsample(const DualPolSignal& signal, int factor, int phase) {
  if (factor < 1 || phase < 0 || phase >= factor) throw std::invalid_argument("downsample: bad factor/phase");
  DualPol<CVec> out;
  for (int p = 0; p < 2; ++p) {
    const CVec& in = signal.pol(p);
    for (std::size_t i = static_cast<std::size_t>(phase); i < in.size(); i += static_cast<std::size_t>(factor))
      out[p].push_back(in[i]);
  }
  return out;
}

DualPolSignal resample(const DualPolSignal& signal, double new_rate) {
  signal.validate();
  const std::size_t n = signal.size();
  const std::size_t n_out = exact_ratio(static_cast<double>(n) * new_rate, signal.sample_rate, "resample");
  const std::size_t keep = std::min(n, n_out);
  // bins strictly inside +-keep/2; the shared Nyquist bin is dropped
  const long long half = static_cast<long long>((keep - 1) / 2);
  DualPolSignal out;
  out.sample_rate = new_rate;
  out.center_freq_offset = signal.center_freq_offset;
  for (int p = 0; p < 2; ++p) {
    CVec spec = signal.pol(p);
    fft(spec);
    CVec& y = out.pol(p);
    y.assign(n_out, Complex{});
    for (long long r = -half; r <= half; ++r) y[wrap_index(r, n_out)] = spec[wrap_index(r, n)];
    const double scale = static_cast<double>(n_out) / static_cast<double>(n);
    for (auto& v : y) v *= scale;
    ifft(y);
  }
  return out;
}

DualPolSignal wdm_mux(std::span<const DualPolSignal> channels, double spacing_hz, double channel_bandwidth_hz) {
  if (channels.empty()) throw std::invalid_argument("wdm_mux: no channels");
  const double fs = channels[0].sample_rate;
  const std::size_t n = channels[0].size();
  for (const auto& ch : channels) {
    ch.validate();
    if (ch.sample_rate != fs || ch.size() != n) throw std::invalid_argument("wdm_mux: channels differ in rate or length");
  }
  const auto count = channels.size();
  const double occupied = static_cast<double>(count - 1) * spacing_hz + channel_bandwidth_hz;
  if (occupied > fs)
    throw std::invalid_argument("wdm_mux: aggregate bandwidth " + std::to_string(occupied) + " Hz exceeds sample rate " +
                                std::to_string(fs) + " Hz (aliasing)");

  DualPolSignal out;
  out.sample_rate = fs;
  out.x.assign(n, Complex{});
  out.y.assign(n, Complex{});
  CVec phasor(n);
  for (std::size_t k = 0; k < count; ++k) {
    const double offset = (static_cast<double>(k) - static_cast<double>(count - 1) / 2.0) * spacing_hz;
    const long long bin = std::llround(offset * static_cast<double>(n) / fs);
    const std::size_t b = wrap_index(bin, n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>((static_cast<unsigned __int128>(b) * i) % n);
      phasor[i] = std::polar(1.0, 2.0 * kPi * static_cast<double>(idx) / static_cast<double>(n));
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.x[i] += channels[k].x[i] * phasor[i];
      out.y[i] += channels[k].y[i] * phasor[i];
    }
  }
  return out;
}

DualPolSignal select_channel(const DualPolSignal& signal, double offset_hz, double bandwidth_hz, double out_rate) {
  signal.validate();
  if (!(bandwidth_hz > 0.0) || bandwidth_hz >= signal.sample_rate)
    throw std::invalid_argument("select_channel: bandwidth must be in (0, sample_rate)");
  const std::size_t n = signal.size();
  const std::size_t n_out = exact_ratio(static_cast<double>(n) * out_rate, signal.sample_rate, "select_channel");
  const double bin_hz = signal.sample_rate / static_cast<double>(n);
  const long long center = std::llround((offset_hz - signal.center_freq_offset) / bin_hz);
  const auto half_bw = static_cast<long long>(std::floor(bandwidth_hz / 2.0 / bin_hz + 1e-9));
  const long long half_out = static_cast<long long>((n_out - 1) / 2);
  const long long half = std::min(half_bw, half_out);

  DualPolSignal out;
  out.sample_rate = out_rate;
  out.center_freq_offset = offset_hz;
  const double scale = static_cast<double>(n_out) / static_cast<double>(n);
  for (int p = 0; p < 2; ++p) {
    CVec spec = signal.pol(p);
    fft(spec);
    CVec& y = out.pol(p);
    y.assign(n_out, Complex{});
    for (long long r = -half; r <= half; ++r) y[wrap_index(r, n_out)] = spec[wrap_index(center + r, n)] * scale;
    ifft(y);
  }
  return out;
}

}  // namespace wdmturbo
