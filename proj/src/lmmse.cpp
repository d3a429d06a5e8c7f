#include <algorithm>
#include <stdexcept>

#include "parallel.hpp"
#include "wdmturbo/turbo.hpp"

namespace wdmturbo {
namespace {

struct Layout {
  int N, L, d, cols;  // cols per pol = N + L
  long center;        // column of the target symbol within a pol block
};

Layout layout_of(const SlidingWindowConfig& cfg, const ChannelTapTrack& track) {
  if (track.L != cfg.L) throw std::invalid_argument("LMMSE: tap track memory differs from configuration");
  const int N = cfg.window();
  return {N, cfg.L, decision_delay(cfg.L), N + cfg.L, cfg.n1 + cfg.L};
}

void check_inputs(const DualPol<CVec>& r, const ChannelTapTrack& track, double noise_var, double sigma_s2) {
  if (r[0].size() != r[1].size() || track.instants() != r[0].size())
    throw std::invalid_argument("LMMSE: tap track does not cover the received sequence");
  if (!(noise_var >= 0.0) || !(sigma_s2 > 0.0)) throw std::invalid_argument("LMMSE: bad noise or symbol variance");
}

// Channel matrix and observation window for target instant i.
void fill_channel(const DualPol<CVec>& r, const ChannelTapTrack& track, const Layout& lo, int n1, std::size_t i,
                  Eigen::MatrixXcd& H, Eigen::VectorXcd& rv) {
  const long len = static_cast<long>(r[0].size());
  H.setZero(2 * lo.N, 2 * lo.cols);
  rv.setZero(2 * lo.N);
  for (int j = 0; j < lo.N; ++j) {
    const long t = static_cast<long>(i) - lo.d - n1 + j;
    if (t < 0 || t >= len) continue;
    for (int p = 0; p < 2; ++p) {
      rv[p * lo.N + j] = r[p][static_cast<std::size_t>(t)];
      for (int q = 0; q < 2; ++q)
        for (int m = 0; m < lo.cols; ++m) {
          const int n = j + lo.L - m;
          if (n < 0 || n > lo.L) continue;
          H(p * lo.N + j, q * lo.cols + m) = std::conj(track.tap(i, 2 * p + q, n));
        }
    }
  }
}

void covariance(const Eigen::MatrixXcd& H, const Eigen::VectorXd& var, double noise_var, Eigen::MatrixXcd& C) {
  const Eigen::Index rows = H.rows();
  C.resize(rows, rows);
  for (Eigen::Index a = 0; a < rows; ++a)
    for (Eigen::Index b = 0; b <= a; ++b) {
      Complex acc{};
      for (Eigen::Index m = 0; m < H.cols(); ++m) acc += H(a, m) * var[m] * std::conj(H(b, m));
      if (a == b) acc = Complex(acc.real() + noise_var, 0.0);
      C(a, b) = acc;
      C(b, a) = std::conj(acc);
    }
}

void solve_and_estimate(LmmseSystem& sys, const Layout& lo, double sigma_s2, LmmseOutput& out, std::size_t i) {
  Eigen::LLT<Eigen::MatrixXcd> llt(sys.C);
  if (llt.info() != Eigen::Success) throw std::runtime_error("LMMSE: covariance matrix is not positive definite");
  const Eigen::VectorXcd resid = sys.r - sys.H * sys.mean;
  for (int p = 0; p < 2; ++p) {
    sys.h[p] = sys.H.col(p * lo.cols + lo.center);
    sys.w[p] = llt.solve(sys.h[p] * sigma_s2);
    const Complex est = sys.w[p].dot(resid);
    double mu = sys.w[p].dot(sys.h[p]).real();
    mu = std::clamp(mu, 0.0, 1.0);
    out.estimates[p][i] = est;
    out.mu[p][i] = mu;
    out.nu2[p][i] = std::max(sigma_s2 * (mu - mu * mu), 1e-9 * sigma_s2);
  }
}

void resize_output(LmmseOutput& out, std::size_t n) {
  for (int p = 0; p < 2; ++p) {
    out.estimates[p].assign(n, Complex{});
    out.mu[p].assign(n, 0.0);
    out.nu2[p].assign(n, 0.0);
  }
}

LmmseSystem build_system(const DualPol<CVec>& received, const ChannelTapTrack& track,
                         const DualPol<SoftSymbolStats>& priors, const SlidingWindowConfig& cfg, const Layout& lo,
                         double noise_var, double sigma_s2, std::size_t i) {
  const long len = static_cast<long>(received[0].size());
  for (int q = 0; q < 2; ++q)
    if (priors[q].mean.size() != received[0].size() || priors[q].variance.size() != received[0].size())
      throw std::invalid_argument("LMMSE: priors do not cover the received sequence");
  LmmseSystem sys;
  fill_channel(received, track, lo, cfg.n1, i, sys.H, sys.r);
  sys.mean.setZero(2 * lo.cols);
  sys.var.setZero(2 * lo.cols);
  for (int q = 0; q < 2; ++q)
    for (int m = 0; m < lo.cols; ++m) {
      const long s = static_cast<long>(i) - cfg.n1 - lo.L + m;
      const int col = q * lo.cols + m;
      if (m == lo.center) {
        sys.var[col] = sigma_s2;
      } else if (s >= 0 && s < len) {
        sys.mean[col] = priors[q].mean[static_cast<std::size_t>(s)];
        sys.var[col] = priors[q].variance[static_cast<std::size_t>(s)];
      }
    }
  covariance(sys.H, sys.var, noise_var, sys.C);
  return sys;
}

}  // namespace

LmmseSystem lmmse_system(const DualPol<CVec>& received, const ChannelTapTrack& track,
                         const DualPol<SoftSymbolStats>& priors, const SlidingWindowConfig& cfg, double noise_var,
                         double sigma_s2, std::size_t i) {
  const Layout lo = layout_of(cfg, track);
  LmmseSystem sys = build_system(received, track, priors, cfg, lo, noise_var, sigma_s2, i);
  LmmseOutput scratch;
  resize_output(scratch, 1);
  solve_and_estimate(sys, lo, sigma_s2, scratch, 0);
  return sys;
}

LmmseOutput lmmse_equalize(const DualPol<CVec>& received, const ChannelTapTrack& track,
                           const DualPol<SoftSymbolStats>& priors, const SlidingWindowConfig& cfg, double noise_var,
                           double sigma_s2) {
  check_inputs(received, track, noise_var, sigma_s2);
  const Layout lo = layout_of(cfg, track);
  const std::size_t n = received[0].size();
  LmmseOutput out;
  resize_output(out, n);
  detail::FirstError err;
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    err.run([&] {
      LmmseSystem sys = build_system(received, track, priors, cfg, lo, noise_var, sigma_s2, i);
      solve_and_estimate(sys, lo, sigma_s2, out, i);
    });
  }
  err.rethrow();
  return out;
}

namespace reference {

LmmseOutput lmmse_equalize_serial(const DualPol<CVec>& received, const ChannelTapTrack& track,
                                  const DualPol<SoftSymbolStats>& priors, const SlidingWindowConfig& cfg,
                                  double noise_var, double sigma_s2) {
  check_inputs(received, track, noise_var, sigma_s2);
  const Layout lo = layout_of(cfg, track);
  const std::size_t n = received[0].size();
  LmmseOutput out;
  resize_output(out, n);
  for (std::size_t i = 0; i < n; ++i) {
    LmmseSystem sys = build_system(received, track, priors, cfg, lo, noise_var, sigma_s2, i);
    solve_and_estimate(sys, lo, sigma_s2, out, i);
  }
  return out;
}

LmmseOutput lmmse_equalize_no_prior(const DualPol<CVec>& received, const ChannelTapTrack& track,
                                    const SlidingWindowConfig& cfg, double noise_var, double sigma_s2) {
  check_inputs(received, track, noise_var, sigma_s2);
  const Layout lo = layout_of(cfg, track);
  const std::size_t n = received[0].size();
  LmmseOutput out;
  resize_output(out, n);
  for (std::size_t i = 0; i < n; ++i) {
    LmmseSystem sys;
    fill_channel(received, track, lo, cfg.n1, i, sys.H, sys.r);
    sys.mean.setZero(2 * lo.cols);
    sys.var = Eigen::VectorXd::Constant(2 * lo.cols, sigma_s2);
    for (int m = 0; m < lo.cols; ++m) {
      const long s = static_cast<long>(i) - cfg.n1 - lo.L + m;
      if (m != lo.center && (s < 0 || s >= static_cast<long>(n))) sys.var[m] = sys.var[lo.cols + m] = 0.0;
    }
    covariance(sys.H, sys.var, noise_var, sys.C);
    Eigen::LLT<Eigen::MatrixXcd> llt(sys.C);
    if (llt.info() != Eigen::Success) throw std::runtime_error("LMMSE: covariance matrix is not positive definite");
    for (int p = 0; p < 2; ++p) {
      const Eigen::VectorXcd h = sys.H.col(p * lo.cols + lo.center);
      const Eigen::VectorXcd w = llt.solve(h * sigma_s2);
      const double mu = std::clamp(w.dot(h).real(), 0.0, 1.0);
      out.estimates[p][i] = w.dot(sys.r);
      out.mu[p][i] = mu;
      out.nu2[p][i] = std::max(sigma_s2 * (mu - mu * mu), 1e-9 * sigma_s2);
    }
  }
  return out;
}

}  // namespace reference
}  // namespace wdmturbo
