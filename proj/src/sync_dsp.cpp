#include "wdmturbo/sync_dsp.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <stdexcept>

#include "wdmturbo/fft.hpp"

namespace wdmturbo {

NlmsState NlmsState::initial(const NlmsConfig& cfg) {
  if (cfg.n_taps < 1 || cfg.n_taps % 2 == 0) throw std::invalid_argument("NLMS tap count must be odd");
  if (!(cfg.step_size > 0.0)) throw std::invalid_argument("NLMS step size must be positive");
  NlmsState s;
  s.cfg = cfg;
  for (int o = 0; o < 2; ++o)
    for (int i = 0; i < 2; ++i) s.taps[o][i].assign(static_cast<std::size_t>(cfg.n_taps), Complex{});
  const auto c = static_cast<std::size_t>(cfg.n_taps / 2);
  s.taps[0][0][c] = 1.0;
  s.taps[1][1][c] = 1.0;
  return s;
}

long coarse_alignment(const DualPolSignal& signal, const SymbolFrame& frame) {
  signal.validate();
  if (signal.size() % 2 != 0) throw std::invalid_argument("coarse_alignment: expected 2 samples/symbol");
  const std::size_t t = signal.size() / 2;
  if (frame.instants() > t) throw std::invalid_argument("coarse_alignment: frame longer than signal");
  DualPol<CVec> rx, pil;
  for (int p = 0; p < 2; ++p) {
    rx[p].resize(t);
    for (std::size_t i = 0; i < t; ++i) rx[p][i] = signal.pol(p)[2 * i];
    pil[p].assign(t, Complex{});
    for (std::size_t i = 0; i < frame.instants(); ++i)
      if (frame.is_pilot(i)) pil[p][i] = frame.symbols[p][i];
    fft(rx[p]);
    fft(pil[p]);
  }
  RVec metric(t, 0.0);
  CVec corr(t);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      for (std::size_t k = 0; k < t; ++k) corr[k] = rx[q][k] * std::conj(pil[p][k]);
      ifft(corr);
      for (std::size_t k = 0; k < t; ++k) metric[k] += std::norm(corr[k]);
    }
  std::size_t best = 0;
  for (std::size_t k = 1; k < t; ++k)
    if (metric[k] > metric[best]) best = k;
  const long tl = static_cast<long>(t);
  const long off = static_cast<long>(best);
  return off > tl / 2 ? off - tl : off;
}

NlmsResult nlms_equalize(const DualPolSignal& signal, const SymbolFrame& frame, NlmsState state) {
  const NlmsConfig& cfg = state.cfg;
  const long align = coarse_alignment(signal, frame);
  const long n = static_cast<long>(signal.size());
  const long taps = cfg.n_taps;
  const long center = taps / 2;
  const std::size_t instants = frame.instants();

  CVec reg(2 * static_cast<std::size_t>(taps));
  auto load = [&](std::size_t i) {
    const long base = 2 * (static_cast<long>(i) + align) - center;
    double energy = 0.0;
    for (int q = 0; q < 2; ++q)
      for (long k = 0; k < taps; ++k) {
        const long idx = ((base + k) % n + n) % n;
        const Complex v = signal.pol(q)[static_cast<std::size_t>(idx)];
        reg[static_cast<std::size_t>(q * taps + k)] = v;
        energy += std::norm(v);
      }
    return energy;
  };
  auto output = [&](int o) {
    Complex y{};
    for (int q = 0; q < 2; ++q)
      for (long k = 0; k < taps; ++k)
        y += std::conj(state.taps[o][q][static_cast<std::size_t>(k)]) * reg[static_cast<std::size_t>(q * taps + k)];
    return y;
  };
  auto update = [&](const DualPol<Complex>& err, double energy) {
    const double g = cfg.step_size / (cfg.epsilon + energy);
    for (int o = 0; o < 2; ++o)
      for (int q = 0; q < 2; ++q)
        for (long k = 0; k < taps; ++k) {
          auto& w = state.taps[o][q][static_cast<std::size_t>(k)];
          w = (1.0 - cfg.leakage) * w + g * std::conj(err[o]) * reg[static_cast<std::size_t>(q * taps + k)];
        }
  };
  auto training = [&](std::size_t i) { return frame.block_index[i] < cfg.training_blocks; };

  NlmsResult res;
  for (int pass = 0; pass < cfg.training_passes; ++pass)
    for (std::size_t i = 0; i < instants && training(i); ++i) {
      const double e = load(i);
      DualPol<Complex> err{frame.symbols[0][i] - output(0), frame.symbols[1][i] - output(1)};
      update(err, e);
    }

  double in_power = 0.0, out_power = 0.0;
  for (int p = 0; p < 2; ++p) res.symbols[p].resize(instants);
  for (std::size_t i = 0; i < instants; ++i) {
    const double e = load(i);
    in_power += std::norm(reg[static_cast<std::size_t>(center)]) +
                std::norm(reg[static_cast<std::size_t>(taps + center)]);
    DualPol<Complex> y{output(0), output(1)};
    res.symbols[0][i] = y[0];
    res.symbols[1][i] = y[1];
    out_power += std::norm(y[0]) + std::norm(y[1]);
    if (frame.is_pilot(i) || training(i)) {
      DualPol<Complex> err{frame.symbols[0][i] - y[0], frame.symbols[1][i] - y[1]};
      if (frame.is_pilot(i) && !training(i)) res.pilot_mse.push_back(std::norm(err[0]) + std::norm(err[1]));
      update(err, e);
    }
  }
  if (!std::isfinite(out_power) || out_power > cfg.divergence_ratio * in_power)
    throw std::runtime_error("NLMS equalizer diverged (output power " + std::to_string(out_power) +
                             ", input power " + std::to_string(in_power) + ")");
  res.state = std::move(state);
  res.alignment = align;
  return res;
}

DdpllResult ddpll(const DualPol<CVec>& symbols, const SymbolFrame& frame, const Constellation& c,
                  const DdpllConfig& cfg) {
  if (!(cfg.bandwidth > 0.0) || !(cfg.damping > 0.0)) throw std::invalid_argument("DDPLL gains must be positive");
  const double zeta = cfg.damping;
  const double wn = 2.0 * cfg.bandwidth / (zeta + 1.0 / (4.0 * zeta));
  const double kp = 2.0 * zeta * wn;
  const double ki = wn * wn;
  const std::size_t n = frame.instants();

  DdpllResult res;
  for (int p = 0; p < 2; ++p) {
    const CVec& r = symbols[p];
    if (r.size() != n) throw std::invalid_argument("ddpll: symbol count does not match frame");
    Complex acc{};
    int used = 0;
    for (std::size_t i = 0; i < n && used < cfg.acquisition_pilots; ++i)
      if (frame.is_pilot(i)) {
        acc += r[i] * std::conj(frame.symbols[p][i]);
        ++used;
      }
    double theta = used > 0 ? std::arg(acc) : 0.0;
    double integ = 0.0;
    Complex window{};
    int in_window = 0;
    res.symbols[p].resize(n);
    res.phase[p].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Complex z = r[i] * std::polar(1.0, -theta);
      res.symbols[p][i] = z;
      res.phase[p][i] = theta;
      Complex ref;
      if (frame.is_pilot(i)) {
        ref = frame.symbols[p][i];
        window += z * std::conj(ref);
        if (++in_window == cfg.slip_window) {
          const double drift = std::arg(window);
          if (std::abs(drift) > kPi / 4.0) {
            ++res.cycle_slips;
            const double jump = kPi / 2.0 * std::round(drift / (kPi / 2.0));
            theta += jump;
            spdlog::warn("ddpll: cycle slip at instant {} pol {} (pilot-averaged phase error {:.3f} rad, re-anchored by {:.3f})",
                         i, p, drift, jump);
          }
          window = Complex{};
          in_window = 0;
        }
      } else {
        ref = c.point(c.slice(z));
      }
      const double err = std::imag(z * std::conj(ref)) / std::max(std::norm(ref), 1e-12);
      integ += ki * err;
      theta += kp * err + integ;
    }
  }
  return res;
}

DualPol<CVec> pilot_gain_correct(const DualPol<CVec>& symbols, const SymbolFrame& frame) {
  DualPol<CVec> out;
  for (int p = 0; p < 2; ++p) {
    if (symbols[p].size() != frame.instants()) throw std::invalid_argument("pilot_gain_correct: size mismatch");
    Complex num{};
    double den = 0.0;
    for (std::size_t i = 0; i < frame.instants(); ++i)
      if (frame.is_pilot(i)) {
        num += symbols[p][i] * std::conj(frame.symbols[p][i]);
        den += std::norm(frame.symbols[p][i]);
      }
    if (den == 0.0) throw std::invalid_argument("pilot_gain_correct: frame has no pilots");
    const Complex g = num / den;
    out[p] = symbols[p];
    for (auto& v : out[p]) v /= g;
  }
  return out;
}

}  // namespace wdmturbo
