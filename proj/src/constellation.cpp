#include "wdmturbo/constellation.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wdmturbo {
namespace {

// log P(b = 1) and log P(b = 0) for an L-value, stable for large |L|.
inline double log_p1(double l) { return l >= 0 ? -std::log1p(std::exp(-l)) : l - std::log1p(std::exp(l)); }
inline double log_p0(double l) { return log_p1(-l); }

inline double clip_llr(double l) {
  if (std::isnan(l)) throw std::invalid_argument("NaN L-value");
  return std::clamp(l, -kLlrClip, kLlrClip);
}

void check_channel(const EquivalentChannel& ch, const LlrBlock& priors, const Constellation& c) {
  const std::size_t n = ch.estimates.size();
  if (ch.mu.size() != n || ch.nu2.size() != n)
    throw std::invalid_argument("extrinsic_llrs: estimate/mu/nu2 length mismatch");
  if (!priors.values.empty() &&
      priors.values.size() != n * static_cast<std::size_t>(c.bits_per_symbol()))
    throw std::invalid_argument("extrinsic_llrs: prior length mismatch");
}

// One instant of the extrinsic demapper. Scratch buffers are per caller.
void demap_instant(std::size_t i, const EquivalentChannel& ch, const LlrBlock& priors,
                   const Constellation& c, RVec& base, RVec& prior_log, double* out) {
  const int q = c.bits_per_symbol();
  const int m = c.order();
  const double nu2_floor = 1e-9 * c.energy();

  double nu2 = ch.nu2[i];
  const double mu = ch.mu[i];
  if (!(nu2 > 0.0) || !std::isfinite(nu2) || !std::isfinite(mu))
    throw std::invalid_argument("extrinsic_llrs: degenerate equivalent channel (nu2 <= 0 or non-finite)");
  nu2 = std::max(nu2, nu2_floor);
  const Complex est = ch.estimates[i];

  const bool has_priors = !priors.values.empty();
  // prior_log[2*l + b] = log P(b_l = b)
  if (has_priors) {
    for (int l = 0; l < q; ++l) {
      const double lv = clip_llr(priors.values[i * q + l]);
      prior_log[2 * l + 0] = log_p0(lv);
      prior_log[2 * l + 1] = log_p1(lv);
    }
  }

  for (int s = 0; s < m; ++s) {
    double v = -std::norm(est - mu * c.point(s)) / nu2;
    if (has_priors)
      for (int l = 0; l < q; ++l) v += prior_log[2 * l + c.bit(s, l)];
    base[s] = v;
  }

  for (int l = 0; l < q; ++l) {
    double max1 = -std::numeric_limits<double>::infinity();
    double max0 = max1;
    for (int s = 0; s < m; ++s) {
      const int b = c.bit(s, l);
      const double v = has_priors ? base[s] - prior_log[2 * l + b] : base[s];
      if (b) max1 = std::max(max1, v); else max0 = std::max(max0, v);
    }
    double sum1 = 0.0, sum0 = 0.0;
    for (int s = 0; s < m; ++s) {
      const int b = c.bit(s, l);
      const double v = has_priors ? base[s] - prior_log[2 * l + b] : base[s];
      if (b) sum1 += std::exp(v - max1); else sum0 += std::exp(v - max0);
    }
    const double le = (max1 + std::log(sum1)) - (max0 + std::log(sum0));
    out[l] = std::clamp(le, -kLlrClip, kLlrClip);
  }
}

}  // namespace

Constellation Constellation::square_qam(int order) {
  if (order != 4 && order != 16 && order != 64 && order != 256)
    throw std::invalid_argument("unsupported constellation order " + std::to_string(order));
  Constellation c;
  c.order_ = order;
  c.bits_ = static_cast<int>(std::lround(std::log2(order)));
  c.levels_ = static_cast<int>(std::lround(std::sqrt(order)));
  c.scale_ = std::sqrt(3.0 / (2.0 * (order - 1)));
  const int half = c.bits_ / 2;
  c.level_to_gray_.resize(c.levels_);
  for (int k = 0; k < c.levels_; ++k) c.level_to_gray_[k] = static_cast<std::size_t>(k ^ (k >> 1));

  c.points_.assign(order, Complex{});
  for (int ki = 0; ki < c.levels_; ++ki) {
    for (int kq = 0; kq < c.levels_; ++kq) {
      const std::size_t label = (c.level_to_gray_[ki] << half) | c.level_to_gray_[kq];
      c.points_[label] = {(2.0 * ki - c.levels_ + 1) * c.scale_, (2.0 * kq - c.levels_ + 1) * c.scale_};
    }
  }
  double e = 0.0;
  for (const auto& p : c.points_) e += std::norm(p);
  c.energy_ = e / order;
  return c;
}

Constellation Constellation::from_name(const std::string& name) {
  std::string n;
  for (char ch : name) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  if (n == "qpsk" || n == "4qam") return square_qam(4);
  if (n == "16qam") return square_qam(16);
  if (n == "64qam") return square_qam(64);
  if (n == "256qam") return square_qam(256);
  throw std::invalid_argument("unknown modulation '" + name + "'");
}

std::size_t Constellation::label_of(std::span<const std::uint8_t> bits) const {
  if (bits.size() != static_cast<std::size_t>(bits_))
    throw std::invalid_argument("label_of: expected q bits");
  std::size_t label = 0;
  for (auto b : bits) label = (label << 1) | (b & 1U);
  return label;
}

std::size_t Constellation::slice(Complex z) const {
  auto level = [&](double v) {
    const long k = std::lround((v / scale_ + levels_ - 1) / 2.0);
    return static_cast<std::size_t>(std::clamp<long>(k, 0, levels_ - 1));
  };
  const int half = bits_ / 2;
  return (level_to_gray_[level(z.real())] << half) | level_to_gray_[level(z.imag())];
}

SymbolPriors symbol_priors(const LlrBlock& llrs, const Constellation& c) {
  const auto q = static_cast<std::size_t>(c.bits_per_symbol());
  if (llrs.values.size() % q != 0)
    throw std::invalid_argument("symbol_priors: L-value count not a multiple of q");
  const std::size_t n = llrs.values.size() / q;
  const auto m = static_cast<std::size_t>(c.order());
  SymbolPriors out;
  out.order = m;
  out.prob.assign(n * m, 0.0);
  RVec lp(2 * q);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < q; ++l) {
      const double lv = clip_llr(llrs.values[i * q + l]);
      lp[2 * l] = log_p0(lv);
      lp[2 * l + 1] = log_p1(lv);
    }
    double* row = out.prob.data() + i * m;
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < m; ++s) {
      double v = 0.0;
      for (std::size_t l = 0; l < q; ++l) v += lp[2 * l + c.bit(s, static_cast<int>(l))];
      row[s] = v;
      mx = std::max(mx, v);
    }
    double sum = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
      row[s] = std::exp(row[s] - mx);
      sum += row[s];
    }
    for (std::size_t s = 0; s < m; ++s) row[s] /= sum;
  }
  return out;
}

SoftSymbolStats soft_stats(const SymbolPriors& priors, const Constellation& c) {
  if (priors.order != static_cast<std::size_t>(c.order()))
    throw std::invalid_argument("soft_stats: prior table order mismatch");
  const std::size_t n = priors.instants();
  SoftSymbolStats st;
  st.mean.resize(n);
  st.variance.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = priors.row(i);
    Complex mean{};
    double e2 = 0.0;
    for (std::size_t s = 0; s < row.size(); ++s) {
      mean += row[s] * c.point(s);
      e2 += row[s] * std::norm(c.point(s));
    }
    st.mean[i] = mean;
    st.variance[i] = std::max(0.0, e2 - std::norm(mean));
  }
  return st;
}

LlrBlock extrinsic_llrs(const EquivalentChannel& ch, const LlrBlock& priors, const Constellation& c) {
  check_channel(ch, priors, c);
  const std::size_t n = ch.estimates.size();
  const int q = c.bits_per_symbol();
  LlrBlock out;
  out.kind = LlrKind::extrinsic;
  out.values.assign(n * q, 0.0);
  const auto count = static_cast<std::ptrdiff_t>(n);
  detail::FirstError err;
#pragma omp parallel
  {
    RVec base(c.order()), prior_log(2 * q);
#pragma omp for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      err.run([&] {
        demap_instant(static_cast<std::size_t>(i), ch, priors, c, base, prior_log, out.values.data() + i * q);
      });
    }
  }
  err.rethrow();
  return out;
}

namespace reference {
LlrBlock extrinsic_llrs_serial(const EquivalentChannel& ch, const LlrBlock& priors, const Constellation& c) {
  check_channel(ch, priors, c);
  const std::size_t n = ch.estimates.size();
  const int q = c.bits_per_symbol();
  LlrBlock out;
  out.kind = LlrKind::extrinsic;
  out.values.assign(n * q, 0.0);
  RVec base(c.order()), prior_log(2 * q);
  for (std::size_t i = 0; i < n; ++i)
    demap_instant(i, ch, priors, c, base, prior_log, out.values.data() + i * q);
  return out;
}
}  // namespace reference

Bits labels_to_bits(std::span<const std::size_t> labels, const Constellation& c) {
  const int q = c.bits_per_symbol();
  Bits out;
  out.reserve(labels.size() * q);
  for (auto lab : labels)
    for (int l = 0; l < q; ++l) out.push_back(static_cast<std::uint8_t>(c.bit(lab, l)));
  return out;
}

}  // namespace wdmturbo
