#include "wdmturbo/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace wdmturbo {

double effective_snr_db(std::span<const Complex> sent, std::span<const Complex> estimates, SnrEstimator estimator,
                        double cap_db) {
  if (sent.empty()) throw std::invalid_argument("effective_snr_db: empty input");
  if (sent.size() != estimates.size()) throw std::invalid_argument("effective_snr_db: length mismatch");
  const double cap = db_to_lin(cap_db);
  if (estimator == SnrEstimator::ratio_of_means) {
    double sig = 0.0, err = 0.0;
    for (std::size_t i = 0; i < sent.size(); ++i) {
      sig += std::norm(sent[i]);
      err += std::norm(estimates[i] - sent[i]);
    }
    if (err == 0.0) return cap_db;
    return lin_to_db(std::min(sig / err, cap));
  }
  double acc = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < sent.size(); ++i) {
    const double err = std::norm(estimates[i] - sent[i]);
    if (err == 0.0) continue;
    acc += std::min(std::norm(sent[i]) / err, cap);
    ++used;
  }
  if (used == 0) return cap_db;
  return lin_to_db(acc / static_cast<double>(used));
}

double gmi_bits_per_4d(const DualPol<std::span<const double>>& llrs, const DualPol<std::span<const std::uint8_t>>& bits,
                       int bits_per_symbol) {
  if (bits_per_symbol < 1) throw std::invalid_argument("gmi: bad bits per symbol");
  const auto q = static_cast<std::size_t>(bits_per_symbol);
  double total = 0.0;
  for (int p = 0; p < 2; ++p) {
    if (llrs[p].size() != bits[p].size() || llrs[p].empty() || llrs[p].size() % q != 0)
      throw std::invalid_argument("gmi: L-values and bits misaligned");
    double loss = 0.0;
    for (std::size_t j = 0; j < llrs[p].size(); ++j) {
      const double x = -(2.0 * bits[p][j] - 1.0) * llrs[p][j];
      loss += (x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x))) / std::log(2.0);
    }
    const double m = static_cast<double>(llrs[p].size() / q);
    total += static_cast<double>(q) - loss / m;
  }
  return total;
}

BerCount post_fec_ber(std::span<const Bits> decoded, std::span<const Bits> sent, std::size_t n_blocks,
                      std::size_t skip_leading, std::size_t skip_trailing) {
  if (decoded.size() != sent.size() || decoded.size() != 2 * n_blocks)
    throw std::invalid_argument("post_fec_ber: expected n_blocks blocks per polarization");
  if (n_blocks <= skip_leading + skip_trailing)
    throw std::invalid_argument("post_fec_ber: not enough blocks for the counting policy");
  BerCount c;
  for (std::size_t p = 0; p < 2; ++p)
    for (std::size_t b = skip_leading; b < n_blocks - skip_trailing; ++b) {
      const Bits& d = decoded[p * n_blocks + b];
      const Bits& s = sent[p * n_blocks + b];
      if (d.size() != s.size()) throw std::invalid_argument("post_fec_ber: block length mismatch");
      for (std::size_t j = 0; j < d.size(); ++j) c.errors += (d[j] != s[j]);
      c.counted += d.size();
    }
  return c;
}

std::string to_json_line(const MetricsRecord& r) {
  nlohmann::ordered_json j;
  j["launch_power_dbm"] = r.launch_power_dbm;
  j["n_spans"] = r.n_spans;
  j["mode"] = r.mode;
  j["turbo_iteration"] = r.turbo_iteration;
  j["seed"] = r.seed;
  j["trial"] = r.trial;
  j["post_fec_ber"] = r.post_fec_ber;
  j["snr_db"] = r.snr_db;
  j["snr_per_symbol_db"] = r.snr_per_symbol_db;
  j["gmi_bits_per_4d_symbol"] = r.gmi_bits_per_4d_symbol;
  j["n_bits_counted"] = r.n_bits_counted;
  j["bit_errors"] = r.bit_errors;
  j["status"] = r.status;
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump();
}

MetricsRecord record_from_json(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  MetricsRecord r;
  r.launch_power_dbm = j.at("launch_power_dbm").get<double>();
  r.n_spans = j.at("n_spans").get<int>();
  r.mode = j.at("mode").get<std::string>();
  r.turbo_iteration = j.at("turbo_iteration").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.trial = j.at("trial").get<int>();
  r.post_fec_ber = j.at("post_fec_ber").get<double>();
  r.snr_db = j.at("snr_db").get<double>();
  r.snr_per_symbol_db = j.at("snr_per_symbol_db").get<double>();
  r.gmi_bits_per_4d_symbol = j.at("gmi_bits_per_4d_symbol").get<double>();
  r.n_bits_counted = j.at("n_bits_counted").get<std::size_t>();
  r.bit_errors = j.at("bit_errors").get<std::size_t>();
  r.status = j.value("status", std::string("ok"));
  r.error = j.value("error", std::string());
  return r;
}

std::string csv_header() {
  return "launch_power_dbm,n_spans,mode,turbo_iteration,seed,trial,post_fec_ber,snr_db,snr_per_symbol_db,"
         "gmi_bits_per_4d_symbol,n_bits_counted,bit_errors,status";
}

std::string to_csv_row(const MetricsRecord& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%d,%s,%d,%llu,%d,%.17g,%.17g,%.17g,%.17g,%zu,%zu,%s", r.launch_power_dbm,
                r.n_spans, r.mode.c_str(), r.turbo_iteration, static_cast<unsigned long long>(r.seed), r.trial,
                r.post_fec_ber, r.snr_db, r.snr_per_symbol_db, r.gmi_bits_per_4d_symbol, r.n_bits_counted, r.bit_errors,
                r.status.c_str());
  return buf;
}

}  // namespace wdmturbo
