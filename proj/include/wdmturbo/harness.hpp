#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wdmturbo/fec.hpp"
#include "wdmturbo/fiber.hpp"
#include "wdmturbo/metrics.hpp"
#include "wdmturbo/sync_dsp.hpp"
#include "wdmturbo/turbo.hpp"

namespace wdmturbo {

enum class ReceiverMode { edc, dbp, dbp_turbo };
std::string to_string(ReceiverMode m);
ReceiverMode mode_from_string(const std::string& s);

struct CampaignConfig {
  std::string modulation = "64qam";
  int n_wdm_channels = 3;
  double baud = 32e9;
  double grid_spacing_hz = 37.5e9;
  double pilot_rate = 0.05;
  double rolloff = 0.01;
  int tx_samples_per_symbol = 4;

  FiberParams fiber;
  double dbp_step_m = 10e3;

  std::filesystem::path code_file;
  std::size_t n_blocks = 18;
  std::size_t skip_leading_blocks = 3;
  std::size_t skip_trailing_blocks = 1;

  std::vector<double> powers_dbm{0.0};
  std::vector<int> spans{10};
  std::vector<ReceiverMode> modes{ReceiverMode::edc, ReceiverMode::dbp, ReceiverMode::dbp_turbo};
  int n_trials = 1;
  std::uint64_t base_seed = 1;

  NlmsConfig nlms;
  DdpllConfig pll;
  bool bypass_sync = false;
  SlidingWindowConfig turbo;

  void validate() const;
};

/// INI-style file: [section] headers and key = value lines; '#' or ';'
/// starts a comment. Relative code paths resolve against `base_dir`.
CampaignConfig parse_config(std::istream& in, const std::filesystem::path& base_dir);
CampaignConfig load_config(const std::filesystem::path& path);
/// Sets one "section.key" to a value with the file's syntax (lists comma-separated).
void apply_override(CampaignConfig& cfg, const std::string& key, const std::string& value);

/// Seed of a (power, spans, trial) cell. Receiver modes of one cell share
/// transmitted data and noise.
std::uint64_t cell_seed(std::uint64_t base_seed, double power_dbm, int n_spans, int trial);

struct TrialOutput {
  std::vector<MetricsRecord> records;        // per mode, per turbo iteration
  std::vector<std::string> diagnostics;      // line-delimited JSON
};

/// Transmits one frame per WDM channel, propagates, and runs every receiver
/// mode in `modes` on the center channel.
TrialOutput run_trial(const CampaignConfig& cfg, const LdpcCode& code, double power_dbm, int n_spans, int trial,
                      std::span<const ReceiverMode> modes);

struct CampaignResult {
  std::vector<MetricsRecord> records;  // ordered by (power, spans, mode, trial, iteration)
  std::vector<std::string> diagnostics;
  std::size_t failed_cells = 0;
};

/// Runs every (power, spans, trial) cell, `jobs` at a time (0: OpenMP default).
CampaignResult run_campaign(const CampaignConfig& cfg, int jobs = 0);

void write_results(const std::vector<MetricsRecord>& records, const std::filesystem::path& path);
std::vector<MetricsRecord> read_results(const std::filesystem::path& path);

struct PowerRow {
  double power_dbm = 0.0;
  int n_spans = 0;
  std::string mode;
  int iteration = 0;
  double post_fec_ber = 0.0;
  double snr_db = 0.0;
  double gmi = 0.0;
  int n_trials = 0;
};

struct ReachRow {
  int n_spans = 0;
  std::string mode;
  double optimal_power_dbm = 0.0;
  int iteration = 0;
  double post_fec_ber = 0.0;
  double snr_db = 0.0;
  double gmi = 0.0;
};

/// Per (power, spans, mode, iteration): BER pooled over trials, mean SNR
/// and GMI. Failed records are skipped.
std::vector<PowerRow> aggregate_power(const std::vector<MetricsRecord>& records);
/// Per (spans, mode): rows at the power maximizing the last iteration's SNR.
std::vector<ReachRow> reach_table(const std::vector<PowerRow>& rows);

void write_power_csv(const std::vector<PowerRow>& rows, std::ostream& out);
std::vector<PowerRow> parse_power_csv(std::istream& in);
void write_reach_csv(const std::vector<ReachRow>& rows, std::ostream& out);
std::vector<ReachRow> parse_reach_csv(std::istream& in);

/// fig2, fig4, fig5: power table; fig3, fig6: reach table.
void emit_table(const std::vector<MetricsRecord>& records, const std::string& figure, std::ostream& out);

}  // namespace wdmturbo
