#include "wdmturbo/fiber.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "wdmturbo/fft.hpp"
#include "wdmturbo/random.hpp"

namespace wdmturbo {
namespace {

struct Medium {
  double alpha = 0.0;  // 1/m, power
  double beta2 = 0.0;  // s^2/m
  double gamma = 0.0;  // 1/(W m)
};

RVec angular_frequencies(const DualPolSignal& s) {
  RVec w = fft_frequencies(s.size(), s.sample_rate);
  for (auto& v : w) v = 2.0 * kPi * (v + s.center_freq_offset);
  return w;
}

std::vector<double> step_lengths(double length_m, double step_m) {
  std::vector<double> h;
  if (length_m <= 0.0) return h;
  const auto full = static_cast<std::size_t>(std::floor(length_m / step_m + 1e-9));
  h.assign(full, step_m);
  const double rest = length_m - static_cast<double>(full) * step_m;
  if (rest > 1e-9 * step_m) h.push_back(rest);
  return h;
}

void apply_linear(DualPolSignal& s, const RVec& w, const Medium& m, double h) {
#pragma omp parallel for schedule(static)
  for (std::size_t k = 0; k < w.size(); ++k) {
    const Complex op = std::exp(Complex(-0.5 * m.alpha * h, -0.5 * m.beta2 * w[k] * w[k] * h));
    s.x[k] *= op;
    s.y[k] *= op;
  }
}

void apply_nonlinear(DualPolSignal& s, const Medium& m, double h) {
  const double k = -(8.0 / 9.0) * m.gamma * h;
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double pw = std::norm(s.x[i]) + std::norm(s.y[i]);
    const Complex rot = std::polar(1.0, k * pw);
    s.x[i] *= rot;
    s.y[i] *= rot;
  }
}

void check_finite(const DualPolSignal& s) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (!std::isfinite(s.x[i].real()) || !std::isfinite(s.x[i].imag()) || !std::isfinite(s.y[i].real()) ||
        !std::isfinite(s.y[i].imag()))
      throw std::runtime_error("split-step propagation produced a non-finite sample");
}

void to_freq(DualPolSignal& s) {
  fft(s.x);
  fft(s.y);
}
void to_time(DualPolSignal& s) {
  ifft(s.x);
  ifft(s.y);
}

DualPolSignal ssfm(const DualPolSignal& in, const Medium& m, double length_m, double step_m) {
  in.validate();
  DualPolSignal s = in;
  const auto h = step_lengths(length_m, step_m);
  if (h.empty()) return s;
  const RVec w = angular_frequencies(s);
  to_freq(s);
  apply_linear(s, w, m, 0.5 * h[0]);
  for (std::size_t k = 0; k < h.size(); ++k) {
    to_time(s);
    apply_nonlinear(s, m, h[k]);
    to_freq(s);
    apply_linear(s, w, m, 0.5 * h[k] + (k + 1 < h.size() ? 0.5 * h[k + 1] : 0.0));
  }
  to_time(s);
  check_finite(s);
  return s;
}

Medium forward_medium(const FiberParams& p) { return {p.alpha_per_m(), p.beta2(), p.gamma_per_w_m()}; }

}  // namespace

void FiberParams::validate() const {
  auto bad = [](const std::string& what) { throw std::invalid_argument("FiberParams: " + what); };
  if (!(alpha_db_per_km >= 0.0)) bad("alpha_db_per_km must be >= 0");
  if (!(gamma_per_w_km >= 0.0)) bad("gamma_per_w_km must be >= 0");
  if (!std::isfinite(dispersion_ps_nm_km)) bad("dispersion_ps_nm_km must be finite");
  if (!(span_km > 0.0)) bad("span_km must be positive");
  if (n_spans < 1) bad("n_spans must be >= 1");
  if (!(step_m > 0.0)) bad("step_m must be positive");
  if (step_m > span_km * 1e3 * (1.0 + 1e-12)) bad("step_m larger than the span");
  if (!(center_wavelength_nm > 0.0)) bad("center_wavelength_nm must be positive");
  if (std::isnan(nf_db)) bad("nf_db is NaN");
}

double FiberParams::beta2() const {
  const double lambda = center_wavelength_nm * 1e-9;
  const double d = dispersion_ps_nm_km * 1e-6;  // s/m^2
  return -d * lambda * lambda / (2.0 * kPi * kSpeedOfLight);
}

double FiberParams::alpha_per_m() const { return alpha_db_per_km / (10.0 * std::log10(std::exp(1.0))) * 1e-3; }

DualPolSignal propagate_span(const DualPolSignal& signal, const FiberParams& p) {
  p.validate();
  return ssfm(signal, forward_medium(p), p.span_km * 1e3, p.step_m);
}

DualPolSignal amplify(const DualPolSignal& signal, double gain_db, double nf_db, std::uint64_t seed,
                      double wavelength_nm) {
  signal.validate();
  if (!(gain_db >= 0.0)) throw std::invalid_argument("amplify: gain_db must be >= 0");
  const double g = db_to_lin(gain_db);
  const double amp = std::sqrt(g);
  DualPolSignal out = signal;
  for (auto& v : out.x) v *= amp;
  for (auto& v : out.y) v *= amp;
  if (nf_db == -std::numeric_limits<double>::infinity()) return out;
  const double nu = kSpeedOfLight / (wavelength_nm * 1e-9);
  const double var = (g - 1.0) * kPlanck * nu * db_to_lin(nf_db) / 2.0 * signal.sample_rate;
  if (var <= 0.0) return out;
  Rng rng(seed);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.x[i] += rng.complex_gaussian(var);
    out.y[i] += rng.complex_gaussian(var);
  }
  return out;
}

DualPolSignal edc(const DualPolSignal& signal, const FiberParams& p, double distance_km) {
  signal.validate();
  DualPolSignal s = signal;
  const double l = distance_km * 1e3;
  if (l == 0.0) return s;
  const RVec w = angular_frequencies(s);
  const double b2 = p.beta2();
  to_freq(s);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const Complex op = std::polar(1.0, 0.5 * b2 * w[k] * w[k] * l);
    s.x[k] *= op;
    s.y[k] *= op;
  }
  to_time(s);
  return s;
}

DualPolSignal dbp(const DualPolSignal& signal, const FiberParams& p, double distance_km, double step_m) {
  FiberParams back = p;
  back.step_m = step_m;
  back.validate();
  if (distance_km < 0.0) throw std::invalid_argument("dbp: negative distance");
  const Medium fwd = forward_medium(p);
  const Medium rev{-fwd.alpha, -fwd.beta2, -fwd.gamma};
  const double span_m = p.span_km * 1e3;
  const auto spans = step_lengths(distance_km * 1e3, span_m);
  DualPolSignal s = signal;
  for (std::size_t k = spans.size(); k-- > 0;) {
    const double undo = std::exp(-0.5 * fwd.alpha * spans[k]);
    for (auto& v : s.x) v *= undo;
    for (auto& v : s.y) v *= undo;
    s = ssfm(s, rev, spans[k], std::min(step_m, spans[k]));
  }
  return s;
}

namespace reference {

DualPolSignal propagate_span_unmerged(const DualPolSignal& signal, const FiberParams& p) {
  p.validate();
  const Medium m = forward_medium(p);
  DualPolSignal s = signal;
  const RVec w = angular_frequencies(s);
  for (double h : step_lengths(p.span_km * 1e3, p.step_m)) {
    to_freq(s);
    apply_linear(s, w, m, 0.5 * h);
    to_time(s);
    apply_nonlinear(s, m, h);
    to_freq(s);
    apply_linear(s, w, m, 0.5 * h);
    to_time(s);
  }
  check_finite(s);
  return s;
}

}  // namespace reference
}  // namespace wdmturbo
