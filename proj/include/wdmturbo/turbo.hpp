#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "wdmturbo/constellation.hpp"
#include "wdmturbo/fec.hpp"
#include "wdmturbo/waveform.hpp"

namespace wdmturbo {

/// Tap index k of the 2x2 MIMO channel: output pol p, input pol q -> 2p + q.
enum TapIndex : int { kXX = 0, kXY = 1, kYX = 2, kYY = 3 };

/// Time-indexed 2x2 FIR estimates, L+1 taps each. The channel model is
///   r_t^(p) = sum_q sum_n conj(h_n^(pq)) s^(q)_{t+d-n} + noise,
/// with d = floor((L+1)/2), so an identity channel has h_d = 1.
struct ChannelTapTrack {
  int L = 0;
  CVec data;  // (instant, k, n) row-major

  ChannelTapTrack() = default;
  ChannelTapTrack(int memory, std::size_t instants)
      : L(memory), data(instants * 4 * static_cast<std::size_t>(memory + 1)) {}
  std::size_t instants() const { return data.size() / (4 * static_cast<std::size_t>(L + 1)); }
  Complex& tap(std::size_t i, int k, int n) { return data[(i * 4 + k) * (L + 1) + n]; }
  const Complex& tap(std::size_t i, int k, int n) const { return data[(i * 4 + k) * (L + 1) + n]; }
  std::span<const Complex> taps(std::size_t i, int k) const {
    return {data.data() + (i * 4 + k) * (L + 1), static_cast<std::size_t>(L + 1)};
  }
};

inline int decision_delay(int L) { return (L + 1) / 2; }

enum class Feedback { a_posteriori, extrinsic, none };

struct SlidingWindowConfig {
  int n1 = 0;
  int n2 = 2;
  int L = 2;
  double lambda = 0.99;
  double delta = 0.01;      // RLS Sigma_0 = I / delta
  double noise_var = 0.0;   // 0: estimated from pilot residuals
  int n_turbo_iters = 5;
  int decoder_iters = 50;
  Feedback feedback = Feedback::a_posteriori;
  bool stop_when_decoded = true;
  int training_blocks = 3;
  double nlms_step = 0.05;
  int nlms_passes = 3;

  int window() const { return n1 + n2 + 1; }
  void validate() const;
};

struct RlsState {
  int L = 0;
  double lambda = 1.0;
  DualPol<Eigen::MatrixXcd> sigma;   // per input polarization
  std::array<CVec, 4> taps;

  /// Sigma = I / delta, taps set to the identity channel.
  static RlsState initial(int L, double lambda, double delta);
};

struct RlsOutput {
  ChannelTapTrack track;
  DualPol<CVec> prior_error;  // r - r_hat before each update
  int reinitializations = 0;
};

/// Runs the 2x2 RLS recursion over every instant. The regressor of input
/// pol q at instant i is (m_{i+d}, ..., m_{i+d-L}) from `means` (zero outside
/// the sequence); both outputs share the per-input Sigma updates. Taps stored
/// at i are those after the update with r_i.
RlsOutput rls_estimate(const DualPol<CVec>& received, const DualPol<CVec>& means, RlsState& state, double delta);

/// Normalized LMS passes over the first `count` instants with known symbols;
/// only the taps of `state` change.
void nlms_preconverge(const DualPol<CVec>& received, const DualPol<CVec>& symbols, std::size_t count,
                      RlsState& state, double step, int passes);

struct LmmseOutput {
  DualPol<CVec> estimates;
  DualPol<RVec> mu;
  DualPol<RVec> nu2;
};

/// Per-instant linear system of the sliding-window equalizer (exposed for checks).
struct LmmseSystem {
  Eigen::MatrixXcd H;      // 2N x 2(N+L)
  Eigen::VectorXd var;     // prior variances, center entries set to sigma_s2
  Eigen::VectorXcd mean;   // prior means, center entries zeroed
  Eigen::VectorXcd r;      // windowed observations
  Eigen::MatrixXcd C;      // H diag(var) H^H + noise_var I
  DualPol<Eigen::VectorXcd> h;  // center columns
  DualPol<Eigen::VectorXcd> w;  // C^-1 h sigma_s2
};

LmmseSystem lmmse_system(const DualPol<CVec>& received, const ChannelTapTrack& track,
                         const DualPol<SoftSymbolStats>& priors, const SlidingWindowConfig& cfg, double noise_var,
                         double sigma_s2, std::size_t i);

/// Sliding-window 2x2 SISO LMMSE with priors. mu = Re(w^H h) clamped to
/// [0, 1], nu2 = sigma_s2 (mu - mu^2) floored at 1e-9 sigma_s2.
LmmseOutput lmmse_equalize(const DualPol<CVec>& received, const ChannelTapTrack& track,
                           const DualPol<SoftSymbolStats>& priors, const SlidingWindowConfig& cfg, double noise_var,
                           double sigma_s2 = 1.0);

namespace reference {
LmmseOutput lmmse_equalize_serial(const DualPol<CVec>& received, const ChannelTapTrack& track,
                                  const DualPol<SoftSymbolStats>& priors, const SlidingWindowConfig& cfg,
                                  double noise_var, double sigma_s2 = 1.0);
/// Standard LMMSE without priors (zero means, variance sigma_s2 everywhere).
LmmseOutput lmmse_equalize_no_prior(const DualPol<CVec>& received, const ChannelTapTrack& track,
                                    const SlidingWindowConfig& cfg, double noise_var, double sigma_s2 = 1.0);
}  // namespace reference

struct BlockDiagnostics {
  int pol = 0;
  int block = 0;
  double llr_mean_abs = 0.0;
  double llr_std = 0.0;
  int decoder_iterations = 0;
  bool converged = false;
  std::size_t unsatisfied_checks = 0;
};

struct TurboIteration {
  int iteration = 0;
  LmmseOutput equalized;              // iteration 0: received, mu = 1
  DualPol<LlrBlock> channel_llrs;     // interleaved, data instants only
  DualPol<LlrBlock> gmi_llrs;         // same channel, zero priors
  std::vector<DecodeResult> decoded;  // pol-major, n_blocks per pol
  ChannelTapTrack track;              // empty at iteration 0
  double noise_var = 0.0;
  std::vector<BlockDiagnostics> diagnostics;
};

struct TurboResult {
  std::vector<TurboIteration> iterations;
};

/// Iteration 0 demaps the received symbols directly (mu = 1, nu2 from pilot
/// residuals) and decodes. Each further iteration turns decoder output into
/// symbol priors, pins pilots and training-block symbols, pre-converges the
/// taps with NLMS, runs RLS and the LMMSE equalizer, demaps and decodes.
/// Coded bits of each pol are n_blocks codewords, each interleaved with
/// `interleaver`, back to back. `n_iterations` counts turbo iterations after
/// iteration 0 (0 runs the bypass only).
TurboResult turbo_loop(const DualPol<CVec>& received, const SymbolFrame& frame, const SlidingWindowConfig& cfg,
                       const LdpcCode& code, const Interleaver& interleaver, const Constellation& c,
                       int n_iterations);

}  // namespace wdmturbo
