#include <spdlog/spdlog.h>

#include <cmath>
#include <stdexcept>

#include "wdmturbo/turbo.hpp"

namespace wdmturbo {
namespace {

void check_lengths(const DualPol<CVec>& a, const DualPol<CVec>& b) {
  if (a[0].size() != a[1].size() || b[0].size() != b[1].size() || a[0].size() != b[0].size())
    throw std::invalid_argument("RLS: received and reference sequences differ in length");
}

// u[n] = seq[i + d - n], zero outside the sequence
void regressor(const CVec& seq, std::size_t i, int L, Eigen::VectorXcd& u) {
  const long d = decision_delay(L);
  const long len = static_cast<long>(seq.size());
  for (int n = 0; n <= L; ++n) {
    const long idx = static_cast<long>(i) + d - n;
    u[n] = (idx >= 0 && idx < len) ? seq[static_cast<std::size_t>(idx)] : Complex{};
  }
}

Complex predict(const std::array<CVec, 4>& taps, int p, const DualPol<Eigen::VectorXcd>& u) {
  Complex y{};
  for (int q = 0; q < 2; ++q) {
    const CVec& h = taps[static_cast<std::size_t>(2 * p + q)];
    for (Eigen::Index n = 0; n < u[q].size(); ++n) y += std::conj(h[static_cast<std::size_t>(n)]) * u[q][n];
  }
  return y;
}

}  // namespace

void SlidingWindowConfig::validate() const {
  if (n1 < 0 || n2 < 0) throw std::invalid_argument("equalizer window sizes must be >= 0");
  if (L < 0) throw std::invalid_argument("channel memory L must be >= 0");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("RLS forgetting factor must be in (0, 1]");
  if (!(delta > 0.0)) throw std::invalid_argument("RLS delta must be positive");
  if (noise_var < 0.0) throw std::invalid_argument("noise_var must be >= 0");
  if (n_turbo_iters < 0) throw std::invalid_argument("n_turbo_iters must be >= 0");
  if (decoder_iters < 1) throw std::invalid_argument("decoder_iters must be >= 1");
  if (training_blocks < 0) throw std::invalid_argument("training_blocks must be >= 0");
}

RlsState RlsState::initial(int L, double lambda, double delta) {
  if (L < 0) throw std::invalid_argument("RLS: L must be >= 0");
  RlsState s;
  s.L = L;
  s.lambda = lambda;
  const auto n = static_cast<Eigen::Index>(L + 1);
  for (int q = 0; q < 2; ++q) s.sigma[q] = Eigen::MatrixXcd::Identity(n, n) / delta;
  for (auto& h : s.taps) h.assign(static_cast<std::size_t>(L + 1), Complex{});
  const auto d = static_cast<std::size_t>(decision_delay(L));
  s.taps[kXX][d] = 1.0;
  s.taps[kYY][d] = 1.0;
  return s;
}

RlsOutput rls_estimate(const DualPol<CVec>& received, const DualPol<CVec>& means, RlsState& state, double delta) {
  check_lengths(received, means);
  const int L = state.L;
  const std::size_t n = received[0].size();
  const auto m = static_cast<Eigen::Index>(L + 1);
  RlsOutput out;
  out.track = ChannelTapTrack(L, n);
  for (int p = 0; p < 2; ++p) out.prior_error[p].resize(n);

  DualPol<Eigen::VectorXcd> u{Eigen::VectorXcd(m), Eigen::VectorXcd(m)};
  DualPol<Eigen::VectorXcd> gain{Eigen::VectorXcd(m), Eigen::VectorXcd(m)};
  Eigen::VectorXcd pi(m);
  for (std::size_t i = 0; i < n; ++i) {
    for (int q = 0; q < 2; ++q) regressor(means[q], i, L, u[q]);
    DualPol<Complex> e{received[0][i] - predict(state.taps, 0, u), received[1][i] - predict(state.taps, 1, u)};
    out.prior_error[0][i] = e[0];
    out.prior_error[1][i] = e[1];

    for (int q = 0; q < 2; ++q) {
      Eigen::MatrixXcd& sig = state.sigma[q];
      pi.noalias() = sig * u[q];
      double den = state.lambda + u[q].dot(pi).real();
      if (!(den > 0.0) || !std::isfinite(den)) {
        spdlog::warn("RLS: correlation inverse lost positive definiteness at instant {}, re-initializing", i);
        ++out.reinitializations;
        sig = Eigen::MatrixXcd::Identity(m, m) / delta;
        pi.noalias() = sig * u[q];
        den = state.lambda + u[q].dot(pi).real();
      }
      gain[q] = pi / den;
      sig = (sig - gain[q] * pi.adjoint()) / state.lambda;
      sig = 0.5 * (sig + sig.adjoint()).eval();
    }
    for (int p = 0; p < 2; ++p)
      for (int q = 0; q < 2; ++q) {
        CVec& h = state.taps[static_cast<std::size_t>(2 * p + q)];
        for (int k = 0; k < m; ++k) h[static_cast<std::size_t>(k)] += gain[q][k] * std::conj(e[p]);
      }
    for (int k = 0; k < 4; ++k)
      for (int t = 0; t <= L; ++t) out.track.tap(i, k, t) = state.taps[static_cast<std::size_t>(k)][static_cast<std::size_t>(t)];
  }
  return out;
}

void nlms_preconverge(const DualPol<CVec>& received, const DualPol<CVec>& symbols, std::size_t count,
                      RlsState& state, double step, int passes) {
  check_lengths(received, symbols);
  count = std::min(count, received[0].size());
  const auto m = static_cast<Eigen::Index>(state.L + 1);
  DualPol<Eigen::VectorXcd> u{Eigen::VectorXcd(m), Eigen::VectorXcd(m)};
  for (int pass = 0; pass < passes; ++pass)
    for (std::size_t i = 0; i < count; ++i) {
      for (int q = 0; q < 2; ++q) regressor(symbols[q], i, state.L, u[q]);
      DualPol<Complex> e{received[0][i] - predict(state.taps, 0, u), received[1][i] - predict(state.taps, 1, u)};
      const double g = step / (1e-9 + u[0].squaredNorm() + u[1].squaredNorm());
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) {
          CVec& h = state.taps[static_cast<std::size_t>(2 * p + q)];
          for (int k = 0; k < m; ++k) h[static_cast<std::size_t>(k)] += g * u[q][k] * std::conj(e[p]);
        }
    }
}

}  // namespace wdmturbo
