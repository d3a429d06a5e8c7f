#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wdmturbo/turbo.hpp"

namespace wdmturbo {
namespace {

struct Context {
  const SymbolFrame& frame;
  const SlidingWindowConfig& cfg;
  const LdpcCode& code;
  const Interleaver& pi;
  const Constellation& c;
};

// Per-pol interleaved stream -> deinterleaved codeword blocks, pol-major.
std::vector<LlrBlock> to_blocks(const DualPol<LlrBlock>& streams, const Context& ctx) {
  const std::size_t n = ctx.code.n();
  std::vector<LlrBlock> blocks;
  for (int p = 0; p < 2; ++p)
    for (std::size_t b = 0; b < ctx.frame.n_blocks; ++b) {
      std::span<const double> part(streams[p].values.data() + b * n, n);
      blocks.push_back({ctx.pi.deinterleave(part), LlrKind::a_priori});
    }
  return blocks;
}

DualPol<LlrBlock> to_streams(const std::vector<RVec>& blocks, const Context& ctx) {
  DualPol<LlrBlock> streams;
  std::size_t idx = 0;
  for (int p = 0; p < 2; ++p) {
    streams[p].kind = LlrKind::a_priori;
    for (std::size_t b = 0; b < ctx.frame.n_blocks; ++b, ++idx) {
      const RVec part = ctx.pi.interleave(std::span<const double>(blocks[idx]));
      streams[p].values.insert(streams[p].values.end(), part.begin(), part.end());
    }
  }
  return streams;
}

LlrBlock demap(const LmmseOutput& eq, int p, const LlrBlock& priors, const Context& ctx) {
  const auto& idx = ctx.frame.data_instants;
  CVec est(idx.size());
  RVec mu(idx.size()), nu2(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    est[k] = eq.estimates[p][idx[k]];
    mu[k] = eq.mu[p][idx[k]];
    nu2[k] = eq.nu2[p][idx[k]];
  }
  return extrinsic_llrs(EquivalentChannel{est, mu, nu2}, priors, ctx.c);
}

std::vector<BlockDiagnostics> diagnose(const std::vector<LlrBlock>& inputs, const std::vector<DecodeResult>& dec,
                                       const Context& ctx) {
  std::vector<BlockDiagnostics> out;
  for (std::size_t b = 0; b < inputs.size(); ++b) {
    BlockDiagnostics d;
    d.pol = static_cast<int>(b / ctx.frame.n_blocks);
    d.block = static_cast<int>(b % ctx.frame.n_blocks);
    double sum = 0.0, sum2 = 0.0, abs_sum = 0.0;
    for (double v : inputs[b].values) {
      sum += v;
      sum2 += v * v;
      abs_sum += std::abs(v);
    }
    const double m = static_cast<double>(inputs[b].values.size());
    d.llr_mean_abs = abs_sum / m;
    d.llr_std = std::sqrt(std::max(0.0, sum2 / m - (sum / m) * (sum / m)));
    d.decoder_iterations = dec[b].iterations;
    d.converged = dec[b].converged;
    d.unsatisfied_checks = ctx.code.unsatisfied_checks(dec[b].bits);
    out.push_back(d);
  }
  return out;
}

void decode_into(TurboIteration& it, const Context& ctx, std::vector<LlrBlock>& inputs) {
  inputs = to_blocks(it.channel_llrs, ctx);
  it.decoded = decode_blocks(inputs, ctx.code, ctx.cfg.decoder_iters);
  it.diagnostics = diagnose(inputs, it.decoded, ctx);
}

bool all_converged(const TurboIteration& it) {
  for (const auto& d : it.decoded)
    if (!d.converged) return false;
  return true;
}

}  // namespace

TurboResult turbo_loop(const DualPol<CVec>& received, const SymbolFrame& frame, const SlidingWindowConfig& cfg,
                       const LdpcCode& code, const Interleaver& interleaver, const Constellation& c,
                       int n_iterations) {
  cfg.validate();
  const std::size_t T = frame.instants();
  const auto q = static_cast<std::size_t>(c.bits_per_symbol());
  if (received[0].size() != T || received[1].size() != T)
    throw std::invalid_argument("turbo_loop: received length differs from frame");
  if (frame.bits_per_symbol != c.bits_per_symbol()) throw std::invalid_argument("turbo_loop: constellation mismatch");
  if (interleaver.size() != code.n()) throw std::invalid_argument("turbo_loop: interleaver length differs from code");
  if (frame.data_count() * q != code.n() * frame.n_blocks)
    throw std::invalid_argument("turbo_loop: frame does not carry n_blocks codewords");
  if (n_iterations < 0) throw std::invalid_argument("turbo_loop: negative iteration count");

  const Context ctx{frame, cfg, code, interleaver, c};
  const double es = c.energy();
  TurboResult result;

  // iteration 0: equalizer bypassed
  TurboIteration it0;
  it0.iteration = 0;
  it0.equalized.estimates = received;
  for (int p = 0; p < 2; ++p) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < T; ++i)
      if (frame.is_pilot(i)) {
        acc += std::norm(received[p][i] - frame.symbols[p][i]);
        ++count;
      }
    double nu2 = cfg.noise_var;
    if (count > 0) nu2 = acc / static_cast<double>(count);
    if (!(nu2 > 0.0)) nu2 = 1e-9 * es;
    it0.equalized.mu[p].assign(T, 1.0);
    it0.equalized.nu2[p].assign(T, nu2);
  }
  it0.noise_var = 0.5 * (it0.equalized.nu2[0][0] + it0.equalized.nu2[1][0]);
  for (int p = 0; p < 2; ++p) {
    it0.channel_llrs[p] = demap(it0.equalized, p, LlrBlock{}, ctx);
    it0.gmi_llrs[p] = it0.channel_llrs[p];
  }
  std::vector<LlrBlock> inputs;
  decode_into(it0, ctx, inputs);
  result.iterations.push_back(std::move(it0));

  std::size_t training_end = 0;
  while (training_end < T && frame.block_index[training_end] < cfg.training_blocks) ++training_end;

  for (int k = 1; k <= n_iterations; ++k) {
    const TurboIteration& prev = result.iterations.back();
    if (cfg.stop_when_decoded && all_converged(prev)) break;

    std::vector<RVec> feedback(prev.decoded.size());
    for (std::size_t b = 0; b < feedback.size(); ++b) {
      const RVec& app = prev.decoded[b].app.values;
      switch (cfg.feedback) {
        case Feedback::a_posteriori: feedback[b] = app; break;
        case Feedback::extrinsic:
          feedback[b].resize(app.size());
          for (std::size_t j = 0; j < app.size(); ++j)
            feedback[b][j] = std::clamp(app[j] - inputs[b].values[j], -kLlrClip, kLlrClip);
          break;
        case Feedback::none: feedback[b].assign(app.size(), 0.0); break;
      }
    }
    const DualPol<LlrBlock> priors = to_streams(feedback, ctx);

    DualPol<SoftSymbolStats> stats;
    DualPol<CVec> means;
    for (int p = 0; p < 2; ++p) {
      const SoftSymbolStats data = soft_stats(symbol_priors(priors[p], c), c);
      stats[p].mean.assign(T, Complex{});
      stats[p].variance.assign(T, 0.0);
      for (std::size_t d = 0; d < frame.data_count(); ++d) {
        stats[p].mean[frame.data_instants[d]] = data.mean[d];
        stats[p].variance[frame.data_instants[d]] = data.variance[d];
      }
      for (std::size_t i = 0; i < T; ++i)
        if (frame.is_pilot(i) || i < training_end) {
          stats[p].mean[i] = frame.symbols[p][i];
          stats[p].variance[i] = 0.0;
        }
      means[p] = stats[p].mean;
    }

    RlsState rls = RlsState::initial(cfg.L, cfg.lambda, cfg.delta);
    nlms_preconverge(received, frame.symbols, training_end, rls, cfg.nlms_step, cfg.nlms_passes);
    RlsOutput est = rls_estimate(received, means, rls, cfg.delta);

    double noise_var = cfg.noise_var;
    if (noise_var == 0.0) {
      double acc = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < T; ++i)
        if (frame.is_pilot(i)) {
          acc += std::norm(est.prior_error[0][i]) + std::norm(est.prior_error[1][i]);
          count += 2;
        }
      noise_var = count > 0 ? acc / static_cast<double>(count) : 1e-9 * es;
      noise_var = std::max(noise_var, 1e-9 * es);
    }

    TurboIteration it;
    it.iteration = k;
    it.noise_var = noise_var;
    it.equalized = lmmse_equalize(received, est.track, stats, cfg, noise_var, es);
    it.track = std::move(est.track);
    for (int p = 0; p < 2; ++p) {
      it.channel_llrs[p] = demap(it.equalized, p, priors[p], ctx);
      it.gmi_llrs[p] = demap(it.equalized, p, LlrBlock{}, ctx);
    }
    decode_into(it, ctx, inputs);
    result.iterations.push_back(std::move(it));
  }
  return result;
}

}  // namespace wdmturbo
