#pragma once

#include <span>
#include <string>
#include <vector>

#include "wdmturbo/constellation.hpp"

namespace wdmturbo {

enum class SnrEstimator {
  ratio_of_means,   // sum |s|^2 / sum |s_hat - s|^2
  per_symbol_ratio  // mean of |s|^2 / |s_hat - s|^2, each term capped
};

/// Effective SNR in dB of estimates against transmitted symbols. For
/// per_symbol_ratio, instants with s_hat == s exactly are skipped and each
/// ratio is capped at cap_db; a sequence without error returns cap_db.
double effective_snr_db(std::span<const Complex> sent, std::span<const Complex> estimates,
                        SnrEstimator estimator = SnrEstimator::ratio_of_means, double cap_db = 60.0);

/// GMI in bits per 4D symbol from zero-prior L-values (ln P(1)/P(0)), both pols.
double gmi_bits_per_4d(const DualPol<std::span<const double>>& llrs, const DualPol<std::span<const std::uint8_t>>& bits,
                       int bits_per_symbol);

struct BerCount {
  std::size_t errors = 0;
  std::size_t counted = 0;
  double ber() const { return counted == 0 ? 0.0 : static_cast<double>(errors) / static_cast<double>(counted); }
};

/// Information-bit errors over blocks [skip_leading, n_blocks - skip_trailing)
/// of every pol. Blocks are pol-major, n_blocks per pol.
BerCount post_fec_ber(std::span<const Bits> decoded, std::span<const Bits> sent, std::size_t n_blocks,
                      std::size_t skip_leading = 3, std::size_t skip_trailing = 1);

struct MetricsRecord {
  double launch_power_dbm = 0.0;
  int n_spans = 0;
  std::string mode;
  int turbo_iteration = 0;
  std::uint64_t seed = 0;
  int trial = 0;
  double post_fec_ber = 0.0;
  double snr_db = 0.0;
  double snr_per_symbol_db = 0.0;
  double gmi_bits_per_4d_symbol = 0.0;
  std::size_t n_bits_counted = 0;
  std::size_t bit_errors = 0;
  std::string status = "ok";
  std::string error;
};

/// One JSON object per line, fixed key order.
std::string to_json_line(const MetricsRecord& r);
MetricsRecord record_from_json(const std::string& line);

std::string csv_header();
std::string to_csv_row(const MetricsRecord& r);

}  // namespace wdmturbo
