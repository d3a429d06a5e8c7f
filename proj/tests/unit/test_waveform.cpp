#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "wdmturbo/fft.hpp"
#include "wdmturbo/random.hpp"
#include "wdmturbo/waveform.hpp"

using namespace wdmturbo;

namespace {

DualPol<CVec> random_symbols(const Constellation& c, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  DualPol<CVec> s;
  for (int p = 0; p < 2; ++p)
    for (std::size_t i = 0; i < n; ++i) s[p].push_back(c.point(rng.index(c.order())));
  return s;
}

// closed-form RRC impulse response with unit passband, times the symbol period
double rrc_time(double u, double beta) {
  if (std::abs(u) < 1e-12) return 1.0 - beta + 4.0 * beta / kPi;
  if (std::abs(std::abs(u) - 1.0 / (4.0 * beta)) < 1e-9)
    return beta / std::sqrt(2.0) *
           ((1 + 2 / kPi) * std::sin(kPi / (4 * beta)) + (1 - 2 / kPi) * std::cos(kPi / (4 * beta)));
  return (std::sin(kPi * u * (1 - beta)) + 4 * beta * u * std::cos(kPi * u * (1 + beta))) /
         (kPi * u * (1 - 16 * beta * beta * u * u));
}

double max_err(const CVec& a, const CVec& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("frame layout") {
  const auto c = Constellation::square_qam(16);
  Rng rng(5);
  DualPol<Bits> bits{rng.bits(4 * 300), rng.bits(4 * 300)};
  const auto f = build_frame(bits, c, 1.0 / 32.0, 3, 77);
  CHECK(f.pilot_stride == 32);
  CHECK(f.data_count() == 300);
  std::size_t pilots = 0;
  for (std::size_t i = 0; i < f.instants(); ++i) {
    CHECK(f.is_pilot(i) == (i % 32 == 0));
    pilots += f.is_pilot(i);
  }
  CHECK(f.instants() == 300 + pilots);
  CHECK_FALSE(f.is_pilot(f.instants() - 1));
  for (int p = 0; p < 2; ++p) {
    CHECK(extract_data_bits(f, p, c) == bits[p]);
    for (std::size_t i = 0; i < f.instants(); ++i) CHECK(f.symbols[p][i] == c.point(f.labels[p][i]));
  }
  for (std::size_t j = 0; j < f.data_count(); ++j) CHECK(f.block_index[f.data_instants[j]] == static_cast<int>(j / 100));
  for (std::size_t i = 1; i < f.instants(); ++i) CHECK(f.block_index[i] >= f.block_index[i - 1]);

  const auto g = build_frame(bits, c, 1.0 / 32.0, 3, 77);
  CHECK(g.symbols[0] == f.symbols[0]);
  const auto h = build_frame(bits, c, 1.0 / 32.0, 3, 78);
  CHECK(h.symbols[1] != f.symbols[1]);

  const auto none = build_frame(bits, c, 0.0, 3, 1);
  CHECK(none.instants() == 300);
  CHECK(none.pilot_stride == 0);

  CHECK(pilot_stride_for(1.0 / 3.0) == 3);
  CHECK(pilot_stride_for(0.3) == 4);
  CHECK_THROWS_AS(pilot_stride_for(1.5), std::invalid_argument);
  CHECK_THROWS_AS(build_frame(bits, c, 0.1, 7, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_frame(bits, c, 1.0, 3, 1), std::invalid_argument);
  DualPol<Bits> odd{rng.bits(10), rng.bits(10)};
  CHECK_THROWS_AS(build_frame(odd, c, 0.1, 1, 1), std::invalid_argument);
}

TEST_CASE("RRC response") {
  CHECK(rrc_response(0.0, 1.0, 0.2) == 1.0);
  CHECK(rrc_response(0.61, 1.0, 0.2) == 0.0);
  CHECK(rrc_response(0.5, 1.0, 0.2) == doctest::Approx(std::sqrt(0.5)));
  // squared response is Nyquist: |H(f)|^2 + |H(f - Rs)|^2 = 1 over the roll-off region
  for (double f = 0.4; f <= 0.6; f += 0.01)
    CHECK(std::pow(rrc_response(f, 1.0, 0.2), 2) + std::pow(rrc_response(f - 1.0, 1.0, 0.2), 2) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pulse shape matches closed-form impulse response") {
  const double beta = 0.3;
  const int sps = 8;
  const std::size_t n = 512;
  DualPol<CVec> s{CVec(n, Complex{}), CVec(n, Complex{})};
  s[0][0] = 1.0;
  const auto y = rrc_shape(s, sps, PulseShape{1e9, beta, 64});
  CHECK(y.sample_rate == doctest::Approx(8e9));
  double worst = 0.0;
  for (long k = -40 * sps; k <= 40 * sps; ++k) {
    const auto idx = static_cast<std::size_t>((k + static_cast<long>(y.size())) % static_cast<long>(y.size()));
    worst = std::max(worst, std::abs(y.x[idx] - rrc_time(static_cast<double>(k) / sps, beta)));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("shape, match and sample returns the symbols") {
  const auto c = Constellation::square_qam(64);
  const auto s = random_symbols(c, 1024, 3);
  const PulseShape pulse{32e9, 0.01, 64};
  const auto tx = rrc_shape(s, 4, pulse);
  CHECK(tx.mean_power() / 2.0 == doctest::Approx(1.0).epsilon(0.03));
  const auto rx = downsample(matched_filter(tx, pulse), 4);
  for (int p = 0; p < 2; ++p) CHECK(max_err(rx[p], s[p]) < 1e-9);

  const auto padded = rrc_shape(s, 2, pulse, 1100);
  CHECK(padded.size() == 2200);
  const auto back = downsample(matched_filter(padded, pulse), 2);
  CHECK(std::abs(back[0][1050]) < 1e-9);
  CHECK(std::abs(back[0][10] - s[0][10]) < 1e-9);

  CHECK_THROWS_AS(rrc_shape(s, 1, pulse), std::invalid_argument);
  CHECK_THROWS_AS(rrc_shape(s, 2, PulseShape{32e9, 0.0, 64}), std::invalid_argument);
}

TEST_CASE("spectral resampling") {
  const std::size_t n = 256;
  DualPolSignal sig;
  sig.sample_rate = 256.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / 256.0;
    sig.x.push_back(std::polar(1.0, 2 * kPi * 5 * t) + 0.5 * std::polar(1.0, -2 * kPi * 17 * t));
    sig.y.push_back(std::polar(0.3, 2 * kPi * 40 * t));
  }
  const auto up = resample(sig, 1024.0);
  CHECK(up.size() == 1024);
  for (std::size_t i = 0; i < up.size(); ++i) {
    const double t = static_cast<double>(i) / 1024.0;
    CHECK(std::abs(up.x[i] - (std::polar(1.0, 2 * kPi * 5 * t) + 0.5 * std::polar(1.0, -2 * kPi * 17 * t))) < 1e-12);
  }
  const auto down = resample(up, 256.0);
  CHECK(max_err(down.x, sig.x) < 1e-12);
  CHECK(max_err(down.y, sig.y) < 1e-12);
  const auto narrow = resample(sig, 64.0);
  CHECK(max_err(narrow.y, CVec(64, Complex{})) < 1e-12);
  CHECK_THROWS_AS(resample(sig, 100.3), std::invalid_argument);
}

TEST_CASE("WDM multiplex and channel selection") {
  const auto c = Constellation::square_qam(16);
  const PulseShape pulse{1e9, 0.1, 64};
  const int sps = 8;
  const double spacing = 1.25e9;
  std::vector<DualPolSignal> ch;
  std::vector<DualPol<CVec>> sent;
  for (int k = 0; k < 3; ++k) {
    sent.push_back(random_symbols(c, 512, 100 + k));
    ch.push_back(rrc_shape(sent.back(), sps, pulse));
  }
  const auto wdm = wdm_mux(ch, spacing, 1.1e9);
  CHECK(wdm.size() == ch[0].size());
  CHECK(wdm.mean_power() == doctest::Approx(ch[0].mean_power() + ch[1].mean_power() + ch[2].mean_power()).epsilon(1e-9));

  for (int k = 0; k < 3; ++k) {
    const double off = (k - 1) * spacing;
    auto sel = select_channel(wdm, off, spacing, 2e9);
    CHECK(sel.size() == 1024);
    CHECK(sel.center_freq_offset == off);
    const auto rx = downsample(matched_filter(sel, pulse), 2);
    for (int p = 0; p < 2; ++p) CHECK(max_err(rx[p], sent[k][p]) < 1e-9);
  }

  // spectrum of the outer carrier sits on its own bins
  CVec spec = wdm.x;
  fft(spec);
  const auto freq = fft_frequencies(spec.size(), wdm.sample_rate);
  double inside = 0.0, total = 0.0;
  for (std::size_t k = 0; k < spec.size(); ++k) {
    total += std::norm(spec[k]);
    if (std::abs(freq[k] - spacing) <= 0.55e9) inside += std::norm(spec[k]);
  }
  CHECK(inside / total == doctest::Approx(1.0 / 3.0).epsilon(0.05));

  CHECK_THROWS_AS(wdm_mux(ch, 4e9, 1.1e9), std::invalid_argument);
}

TEST_CASE("waveform dump round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "wdmturbo_wave_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "w.f32";
  DualPolSignal s;
  s.sample_rate = 64e9;
  s.center_freq_offset = -50e9;
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    s.x.push_back(rng.complex_gaussian(1.0));
    s.y.push_back(rng.complex_gaussian(2.0));
  }
  write_waveform(s, path);
  CHECK(std::filesystem::file_size(path) == 100 * 16);
  const auto meta = nlohmann::json::parse(std::ifstream(path.string() + ".json"));
  CHECK(meta["length"] == 100);
  CHECK(meta["sample_rate"].get<double>() == 64e9);
  const auto r = read_waveform(path);
  CHECK(r.center_freq_offset == -50e9);
  CHECK(max_err(r.x, s.x) < 1e-6);
  CHECK(max_err(r.y, s.y) < 1e-6);
  {
    std::ifstream in(path, std::ios::binary);
    float first = 0;
    in.read(reinterpret_cast<char*>(&first), 4);
    CHECK(first == static_cast<float>(s.x[0].real()));
  }
  std::filesystem::resize_file(path, 100 * 16 - 4);
  CHECK_THROWS(read_waveform(path));
  std::filesystem::remove_all(dir);
}

TEST_CASE("five percent pilots over a thousand instants") {
  const auto c = Constellation::square_qam(4);
  Rng rng(9);
  DualPol<Bits> bits{rng.bits(2 * 950), rng.bits(2 * 950)};
  const auto f = build_frame(bits, c, 0.05, 1, 3);
  CHECK(f.instants() == 1000);
  std::size_t pilots = 0;
  for (std::size_t i = 0; i < f.instants(); ++i) pilots += f.is_pilot(i);
  CHECK(pilots == 50);
}

TEST_CASE("multiplexing edge cases") {
  const auto c = Constellation::square_qam(4);
  const PulseShape pulse{32e9, 0.01, 64};
  const auto one = rrc_shape(random_symbols(c, 256, 4), 4, pulse);
  const std::vector<DualPolSignal> single{one};
  const auto m = wdm_mux(single, 37.5e9, 33e9);
  CHECK(max_err(m.x, one.x) < 1e-15);
  CHECK(max_err(m.y, one.y) < 1e-15);

  // two unmodulated carriers land on +-spacing/2
  DualPolSignal dc;
  dc.sample_rate = 150e9;
  dc.x.assign(1200, Complex(1.0, 0.0));
  dc.y.assign(1200, Complex{});
  const std::vector<DualPolSignal> two{dc, dc};
  auto tones = wdm_mux(two, 37.5e9, 1e9);
  fft(tones.x);
  const auto freq = fft_frequencies(tones.size(), tones.sample_rate);
  std::vector<double> peaks;
  for (std::size_t k = 0; k < tones.size(); ++k)
    if (std::abs(tones.x[k]) > 0.5 * tones.size()) peaks.push_back(freq[k]);
  std::sort(peaks.begin(), peaks.end());
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0] == doctest::Approx(-18.75e9));
  CHECK(peaks[1] == doctest::Approx(18.75e9));
}

TEST_CASE("channel selection rejects the neighbours") {
  const auto c = Constellation::square_qam(16);
  const PulseShape pulse{32e9, 0.01, 64};
  std::vector<DualPolSignal> ch;
  for (int k = 0; k < 3; ++k) ch.push_back(rrc_shape(random_symbols(c, 600, 40 + k), 5, pulse));
  for (auto& v : ch[1].x) v = 0.0;
  for (auto& v : ch[1].y) v = 0.0;
  const auto wdm = wdm_mux(ch, 37.5e9, 32.32e9);
  const auto sel = select_channel(wdm, 0.0, 37.5e9, 64e9);
  CHECK(10 * std::log10(sel.mean_power() / ch[0].mean_power() + 1e-300) < -40.0);

  // in-band content passes unchanged
  const auto own = select_channel(ch[0], 0.0, 37.5e9, 64e9);
  const auto rx = downsample(matched_filter(own, pulse), 2);
  const auto sent = downsample(matched_filter(ch[0], pulse), 5);
  CHECK(max_err(rx[0], sent[0]) < 1e-9);
}

TEST_CASE("shaping is linear") {
  const auto c = Constellation::square_qam(16);
  const PulseShape pulse{32e9, 0.01, 64};
  auto s = random_symbols(c, 300, 50);
  const auto a = rrc_shape(s, 4, pulse);
  for (auto& pol : s)
    for (auto& v : pol) v *= Complex(0.3, -1.2);
  const auto b = rrc_shape(s, 4, pulse);
  CVec scaled;
  for (auto v : a.x) scaled.push_back(v * Complex(0.3, -1.2));
  CHECK(max_err(b.x, scaled) < 1e-12);
}

TEST_CASE("impulse response is symmetric") {
  DualPol<CVec> s{CVec(128, Complex{}), CVec(128, Complex{})};
  s[0][0] = 1.0;
  const auto y = rrc_shape(s, 16, PulseShape{32e9, 0.01, 64});
  const std::size_t n = y.size();
  for (std::size_t k = 1; k < n / 2; ++k) CHECK(std::abs(y.x[k] - y.x[n - k]) < 1e-12);
  CHECK(std::abs(y.x[0].imag()) < 1e-12);
}
