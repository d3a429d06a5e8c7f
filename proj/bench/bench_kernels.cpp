#include <benchmark/benchmark.h>

#include "wdmturbo/constellation.hpp"
#include "wdmturbo/fec.hpp"
#include "wdmturbo/fiber.hpp"
#include "wdmturbo/random.hpp"
#include "wdmturbo/turbo.hpp"

using namespace wdmturbo;

namespace {

struct DemapFixture {
  Constellation c = Constellation::square_qam(64);
  CVec est;
  RVec mu, nu2;
  LlrBlock priors;

  explicit DemapFixture(std::size_t n) {
    Rng rng(7);
    for (std::size_t i = 0; i < n; ++i) {
      est.push_back(c.point(rng.index(64)) + rng.complex_gaussian(0.05));
      mu.push_back(0.9);
      nu2.push_back(0.05);
    }
    for (std::size_t i = 0; i < n * 6; ++i) priors.values.push_back(4.0 * rng.gaussian());
  }
  EquivalentChannel channel() const { return {est, mu, nu2}; }
};

void BM_ExtrinsicParallel(benchmark::State& st) {
  DemapFixture f(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(extrinsic_llrs(f.channel(), f.priors, f.c));
}
void BM_ExtrinsicSerial(benchmark::State& st) {
  DemapFixture f(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(reference::extrinsic_llrs_serial(f.channel(), f.priors, f.c));
}
BENCHMARK(BM_ExtrinsicParallel)->Arg(4096);
BENCHMARK(BM_ExtrinsicSerial)->Arg(4096);

struct LmmseFixture {
  SlidingWindowConfig cfg;
  DualPol<CVec> r;
  ChannelTapTrack track;
  DualPol<SoftSymbolStats> priors;

  explicit LmmseFixture(std::size_t n) : track(2, n) {
    Rng rng(3);
    for (int p = 0; p < 2; ++p) {
      for (std::size_t i = 0; i < n; ++i) r[p].push_back(rng.complex_gaussian(1.0));
      priors[p].mean.assign(n, Complex{});
      priors[p].variance.assign(n, 0.5);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (int k = 0; k < 4; ++k)
        for (int t = 0; t <= 2; ++t) track.tap(i, k, t) = (k % 3 == 0 && t == 1) ? Complex(1.0) : rng.complex_gaussian(0.01);
  }
};

void BM_LmmseParallel(benchmark::State& st) {
  LmmseFixture f(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(lmmse_equalize(f.r, f.track, f.priors, f.cfg, 0.01));
}
void BM_LmmseSerial(benchmark::State& st) {
  LmmseFixture f(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(reference::lmmse_equalize_serial(f.r, f.track, f.priors, f.cfg, 0.01));
}
BENCHMARK(BM_LmmseParallel)->Arg(4096);
BENCHMARK(BM_LmmseSerial)->Arg(4096);

std::vector<LlrBlock> noisy_blocks(const LdpcCode& code, std::size_t count) {
  Rng rng(11);
  std::vector<LlrBlock> blocks;
  for (std::size_t b = 0; b < count; ++b) {
    const Bits word = code.encode(rng.bits(code.k()));
    LlrBlock l;
    for (auto bit : word) l.values.push_back((bit ? 2.5 : -2.5) + 1.6 * rng.gaussian());
    blocks.push_back(l);
  }
  return blocks;
}

void BM_DecodeParallel(benchmark::State& st) {
  const LdpcCode code = LdpcCode::load(WDMTURBO_DATA_DIR "/codes/desk_r45_n2560.pchk");
  const auto blocks = noisy_blocks(code, 8);
  for (auto _ : st) benchmark::DoNotOptimize(decode_blocks(blocks, code, 50));
}
void BM_DecodeSerial(benchmark::State& st) {
  const LdpcCode code = LdpcCode::load(WDMTURBO_DATA_DIR "/codes/desk_r45_n2560.pchk");
  const auto blocks = noisy_blocks(code, 8);
  for (auto _ : st) benchmark::DoNotOptimize(reference::decode_blocks_serial(blocks, code, 50));
}
BENCHMARK(BM_DecodeParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_DecodeSerial)->Unit(benchmark::kMillisecond);

DualPolSignal random_signal(std::size_t n) {
  Rng rng(5);
  DualPolSignal s;
  s.sample_rate = 128e9;
  for (std::size_t i = 0; i < n; ++i) {
    s.x.push_back(rng.complex_gaussian(1e-3));
    s.y.push_back(rng.complex_gaussian(1e-3));
  }
  return s;
}

void BM_SpanMerged(benchmark::State& st) {
  const DualPolSignal s = random_signal(static_cast<std::size_t>(st.range(0)));
  FiberParams p;
  p.step_m = 1000.0;
  for (auto _ : st) benchmark::DoNotOptimize(propagate_span(s, p));
}
void BM_SpanUnmerged(benchmark::State& st) {
  const DualPolSignal s = random_signal(static_cast<std::size_t>(st.range(0)));
  FiberParams p;
  p.step_m = 1000.0;
  for (auto _ : st) benchmark::DoNotOptimize(reference::propagate_span_unmerged(s, p));
}
BENCHMARK(BM_SpanMerged)->Arg(1 << 15)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SpanUnmerged)->Arg(1 << 15)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
