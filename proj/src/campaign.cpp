#include <omp.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "wdmturbo/harness.hpp"
#include "wdmturbo/random.hpp"

namespace wdmturbo {
namespace {

bool seven_smooth(std::size_t v) {
  for (std::size_t f : {2, 3, 5, 7})
    while (v % f == 0) v /= f;
  return v == 1;
}

// Block length in symbols: holds the frame, keeps every WDM offset on the FFT
// grid and factors into small primes.
std::size_t block_symbols(const CampaignConfig& cfg, std::size_t instants) {
  const double ratio = cfg.n_wdm_channels > 1 ? cfg.grid_spacing_hz / cfg.baud : 0.0;
  for (std::size_t t = instants;; ++t) {
    const double cycles = ratio * static_cast<double>(t);
    if (std::abs(cycles - std::round(cycles)) < 1e-6 && seven_smooth(t)) return t;
  }
}

struct Channel {
  std::vector<Bits> info;      // pol-major blocks
  DualPol<Bits> coded;         // interleaved stream per pol
  SymbolFrame frame;
};

Channel make_channel(const CampaignConfig& cfg, const LdpcCode& code, const Interleaver& pi, const Constellation& c,
                     std::uint64_t seed) {
  Channel ch;
  Rng rng(mix_seed(seed, std::uint64_t{1}));
  for (int p = 0; p < 2; ++p)
    for (std::size_t b = 0; b < cfg.n_blocks; ++b) {
      Bits info = rng.bits(code.k());
      const Bits word = code.encode(info);
      const Bits inter = pi.interleave(std::span<const std::uint8_t>(word));
      ch.coded[p].insert(ch.coded[p].end(), inter.begin(), inter.end());
      ch.info.push_back(std::move(info));
    }
  ch.frame = build_frame(ch.coded, c, cfg.pilot_rate, cfg.n_blocks, mix_seed(seed, std::uint64_t{2}));
  return ch;
}

void scale(DualPolSignal& s, double factor) {
  for (auto& v : s.x) v *= factor;
  for (auto& v : s.y) v *= factor;
}

struct Evaluation {
  double ber = 0.0, snr = 0.0, snr_per_symbol = 0.0, gmi = 0.0;
  BerCount count;
};

Evaluation evaluate(const CampaignConfig& cfg, const LdpcCode& code, const Constellation& c, const Channel& ch,
                    const TurboIteration& it) {
  const SymbolFrame& f = ch.frame;
  const auto q = static_cast<std::size_t>(c.bits_per_symbol());
  const auto lo = static_cast<int>(cfg.skip_leading_blocks);
  const auto hi = static_cast<int>(cfg.n_blocks - cfg.skip_trailing_blocks);
  Evaluation e;

  CVec sent, est;
  DualPol<RVec> llr;
  DualPol<Bits> bits;
  for (int p = 0; p < 2; ++p)
    for (std::size_t d = 0; d < f.data_count(); ++d) {
      const std::size_t i = f.data_instants[d];
      if (f.block_index[i] < lo || f.block_index[i] >= hi) continue;
      sent.push_back(f.symbols[p][i]);
      const double mu = it.equalized.mu[p][i];
      est.push_back(mu > 0.0 ? it.equalized.estimates[p][i] / mu : it.equalized.estimates[p][i]);
      for (std::size_t l = 0; l < q; ++l) {
        llr[p].push_back(it.gmi_llrs[p].values[d * q + l]);
        bits[p].push_back(ch.coded[p][d * q + l]);
      }
    }
  e.snr = effective_snr_db(sent, est, SnrEstimator::ratio_of_means);
  e.snr_per_symbol = effective_snr_db(sent, est, SnrEstimator::per_symbol_ratio);
  e.gmi = gmi_bits_per_4d({std::span<const double>(llr[0]), std::span<const double>(llr[1])},
                          {std::span<const std::uint8_t>(bits[0]), std::span<const std::uint8_t>(bits[1])},
                          c.bits_per_symbol());

  std::vector<Bits> decoded;
  for (const auto& d : it.decoded) decoded.push_back(code.extract_info(d.bits));
  e.count = post_fec_ber(decoded, ch.info, cfg.n_blocks, cfg.skip_leading_blocks, cfg.skip_trailing_blocks);
  e.ber = e.count.ber();
  return e;
}

}  // namespace

TrialOutput run_trial(const CampaignConfig& cfg, const LdpcCode& code, double power_dbm, int n_spans, int trial,
                      std::span<const ReceiverMode> modes) {
  const std::uint64_t seed = cell_seed(cfg.base_seed, power_dbm, n_spans, trial);
  const Constellation c = Constellation::from_name(cfg.modulation);
  const Interleaver pi(code.n(), mix_seed(seed, std::uint64_t{3}));
  const PulseShape pulse{cfg.baud, cfg.rolloff, 64};
  const double channel_bw = (1.0 + cfg.rolloff) * cfg.baud;
  const double amp = std::sqrt(dbm_to_watt(power_dbm) / 2.0);
  const auto n_ch = static_cast<std::size_t>(cfg.n_wdm_channels);
  const std::size_t center = n_ch / 2;

  std::vector<Channel> channels;
  std::vector<DualPolSignal> shaped;
  std::size_t total = 0;
  for (std::size_t k = 0; k < n_ch; ++k) {
    channels.push_back(make_channel(cfg, code, pi, c, mix_seed(seed, std::uint64_t{100 + k})));
    if (k == 0) total = block_symbols(cfg, channels[0].frame.instants());
    shaped.push_back(rrc_shape(channels[k].frame, cfg.tx_samples_per_symbol, pulse, total));
    scale(shaped.back(), amp);
  }
  DualPolSignal line = wdm_mux(shaped, cfg.grid_spacing_hz, channel_bw);
  shaped.clear();

  FiberParams fp = cfg.fiber;
  fp.n_spans = n_spans;
  for (int s = 0; s < n_spans; ++s) {
    line = propagate_span(line, fp);
    line = amplify(line, fp.span_gain_db(), fp.nf_db, mix_seed(seed, std::uint64_t{1000} + static_cast<std::uint64_t>(s)),
                   fp.center_wavelength_nm);
  }
  const DualPolSignal rx = select_channel(line, 0.0, channel_bw, 2.0 * cfg.baud);
  line = DualPolSignal{};
  const Channel& ch = channels[center];
  const double distance_km = n_spans * fp.span_km;

  TrialOutput out;
  for (ReceiverMode mode : modes) {
    DualPolSignal comp = mode == ReceiverMode::edc ? edc(rx, fp, distance_km) : dbp(rx, fp, distance_km, cfg.dbp_step_m);
    comp = matched_filter(comp, pulse);
    scale(comp, 1.0 / amp);

    DualPol<CVec> symbols;
    if (cfg.bypass_sync) {
      DualPol<CVec> ds = downsample(comp, 2, 0);
      for (auto& v : ds) v.resize(ch.frame.instants());
      symbols = pilot_gain_correct(ds, ch.frame);
    } else {
      const NlmsResult eq = nlms_equalize(comp, ch.frame, NlmsState::initial(cfg.nlms));
      symbols = ddpll(eq.symbols, ch.frame, c, cfg.pll).symbols;
    }

    const int iters = mode == ReceiverMode::dbp_turbo ? cfg.turbo.n_turbo_iters : 0;
    const TurboResult tr = turbo_loop(symbols, ch.frame, cfg.turbo, code, pi, c, iters);

    MetricsRecord base;
    base.launch_power_dbm = power_dbm;
    base.n_spans = n_spans;
    base.mode = to_string(mode);
    base.seed = seed;
    base.trial = trial;
    for (const auto& it : tr.iterations) {
      const Evaluation e = evaluate(cfg, code, c, ch, it);
      MetricsRecord r = base;
      r.turbo_iteration = it.iteration;
      r.post_fec_ber = e.ber;
      r.snr_db = e.snr;
      r.snr_per_symbol_db = e.snr_per_symbol;
      r.gmi_bits_per_4d_symbol = e.gmi;
      r.n_bits_counted = e.count.counted;
      r.bit_errors = e.count.errors;
      out.records.push_back(r);
      for (const auto& d : it.diagnostics) {
        nlohmann::ordered_json j;
        j["launch_power_dbm"] = power_dbm;
        j["n_spans"] = n_spans;
        j["mode"] = base.mode;
        j["trial"] = trial;
        j["turbo_iteration"] = it.iteration;
        j["pol"] = d.pol;
        j["block"] = d.block;
        j["llr_mean_abs"] = d.llr_mean_abs;
        j["llr_std"] = d.llr_std;
        j["decoder_iterations"] = d.decoder_iterations;
        j["converged"] = d.converged;
        j["unsatisfied_checks"] = d.unsatisfied_checks;
        j["noise_var"] = it.noise_var;
        out.diagnostics.push_back(j.dump());
      }
    }
    // a loop stopped early by decoder convergence keeps its last state
    for (int k = static_cast<int>(tr.iterations.size()); k <= iters; ++k) {
      MetricsRecord r = out.records.back();
      r.turbo_iteration = k;
      out.records.push_back(r);
    }
  }
  return out;
}

CampaignResult run_campaign(const CampaignConfig& cfg, int jobs) {
  cfg.validate();
  const LdpcCode code = LdpcCode::load(cfg.code_file);
  struct Cell {
    double power;
    int spans;
    int trial;
  };
  std::vector<Cell> cells;
  for (double p : cfg.powers_dbm)
    for (int s : cfg.spans)
      for (int t = 0; t < cfg.n_trials; ++t) cells.push_back({p, s, t});

  std::vector<TrialOutput> outputs(cells.size());
  std::vector<std::string> errors(cells.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Cell& cell = cells[i];
    try {
      outputs[i] = run_trial(cfg, code, cell.power, cell.spans, cell.trial, cfg.modes);
      spdlog::info("cell power={} dBm spans={} trial={} done", cell.power, cell.spans, cell.trial);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      spdlog::error("cell power={} dBm spans={} trial={} failed: {}", cell.power, cell.spans, cell.trial, e.what());
    }
  }

  CampaignResult res;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (errors[i].empty()) continue;
    ++res.failed_cells;
    for (ReceiverMode m : cfg.modes) {
      MetricsRecord r;
      r.launch_power_dbm = cells[i].power;
      r.n_spans = cells[i].spans;
      r.mode = to_string(m);
      r.seed = cell_seed(cfg.base_seed, cells[i].power, cells[i].spans, cells[i].trial);
      r.trial = cells[i].trial;
      r.status = "failed";
      r.error = errors[i];
      outputs[i].records.push_back(r);
    }
  }
  // merge by key: (power, spans, mode, trial, iteration) in configuration order
  for (double p : cfg.powers_dbm)
    for (int s : cfg.spans)
      for (ReceiverMode m : cfg.modes)
        for (std::size_t i = 0; i < cells.size(); ++i) {
          if (cells[i].power != p || cells[i].spans != s) continue;
          for (const auto& r : outputs[i].records)
            if (r.mode == to_string(m)) res.records.push_back(r);
        }
  for (const auto& o : outputs) res.diagnostics.insert(res.diagnostics.end(), o.diagnostics.begin(), o.diagnostics.end());
  return res;
}

void write_results(const std::vector<MetricsRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

std::vector<MetricsRecord> read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<MetricsRecord> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(record_from_json(line));
  return out;
}

}  // namespace wdmturbo
