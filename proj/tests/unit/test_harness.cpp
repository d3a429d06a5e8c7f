#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <sstream>

#include "wdmturbo/harness.hpp"

using namespace wdmturbo;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = WDMTURBO_SOURCE_DIR;

std::string small_ini(const std::string& extra = "") {
  return R"(
[link]
modulation = 16qam
channels = 1
pilot_rate = 0.05
rolloff = 0.1
samples_per_symbol = 4

[fiber]
span_km = 50
step_m = 1000
gamma_per_w_km = 0
dbp_step_m = 25000

[code]
file = codes/desk_r45_n2560.pchk
blocks = 6
skip_leading = 3
skip_trailing = 1

[sweep]
power_dbm = 0
spans = 1
modes = edc, dbp, dbp_turbo
trials = 1
seed = 7

[turbo]
iterations = 2
training_blocks = 3
)" + extra;
}

CampaignConfig small_config(const std::string& extra = "") {
  std::istringstream in(small_ini(extra));
  return parse_config(in, kRoot / "data");
}

bool same(const MetricsRecord& a, const MetricsRecord& b) { return to_json_line(a) == to_json_line(b); }

MetricsRecord rec(double p, const std::string& mode, int iter, double snr, std::size_t errors = 0) {
  MetricsRecord r;
  r.launch_power_dbm = p;
  r.n_spans = 10;
  r.mode = mode;
  r.turbo_iteration = iter;
  r.snr_db = snr;
  r.gmi_bits_per_4d_symbol = snr / 2;
  r.bit_errors = errors;
  r.n_bits_counted = 1000;
  r.post_fec_ber = errors / 1000.0;
  return r;
}

}  // namespace

TEST_CASE("config parsing") {
  const CampaignConfig c = small_config();
  CHECK(c.modulation == "16qam");
  CHECK(c.n_wdm_channels == 1);
  CHECK(c.code_file == kRoot / "data" / "codes" / "desk_r45_n2560.pchk");
  CHECK(c.modes.size() == 3);
  CHECK(c.modes[2] == ReceiverMode::dbp_turbo);
  CHECK(c.fiber.gamma_per_w_km == 0.0);
  CHECK(c.base_seed == 7);

  std::istringstream list(small_ini("[receiver]\nbypass_sync = yes\n"));
  auto c2 = parse_config(list, kRoot / "data");
  CHECK(c2.bypass_sync);

  auto bad = [](const std::string& extra) {
    std::istringstream in(small_ini(extra));
    CHECK_THROWS_AS(parse_config(in, kRoot / "data"), std::invalid_argument);
  };
  bad("[turbo]\nwidth = 3\n");
  bad("[bogus]\nx = 1\n");
  bad("[receiver]\nbypass_sync = maybe\n");
  bad("[sweep]\ntrials = 1.5\n");

  auto invalid = [](const std::string& key, const std::string& value) {
    CampaignConfig c = small_config();
    apply_override(c, key, value);
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  };
  invalid("link.channels", "4");
  invalid("link.modulation", "8psk");
  invalid("code.skip_leading", "2");
  invalid("code.blocks", "4");
  invalid("code.file", "/nonexistent.pchk");
  invalid("sweep.trials", "0");
  invalid("sweep.spans", "0");
  invalid("receiver.nlms_training_blocks", "4");
}

TEST_CASE("apply_override") {
  CampaignConfig c = small_config();
  apply_override(c, "sweep.power_dbm", "-2, 0,2.5");
  REQUIRE(c.powers_dbm.size() == 3);
  CHECK(c.powers_dbm[2] == 2.5);
  apply_override(c, "SWEEP.modes", "dbp");
  CHECK(c.modes == std::vector<ReceiverMode>{ReceiverMode::dbp});
  apply_override(c, "turbo.feedback", "none");
  CHECK(c.turbo.feedback == Feedback::none);
  apply_override(c, "fiber.nf_db", "-inf");
  CHECK(std::isinf(c.fiber.nf_db));
  CHECK_THROWS_AS(apply_override(c, "turbo.nope", "1"), std::invalid_argument);
  CHECK_THROWS_AS(apply_override(c, "link.baud", "fast"), std::invalid_argument);
  CHECK_THROWS_AS(apply_override(c, "sweep.modes", "edc, mlse"), std::invalid_argument);
}

TEST_CASE("presets load") {
  const CampaignConfig desk = load_config(kRoot / "configs" / "desk.cfg");
  CHECK(desk.modulation == "64qam");
  CHECK(desk.n_wdm_channels == 3);
  CHECK(desk.spans == std::vector<int>{10});
  CHECK(fs::exists(desk.code_file));

  const CampaignConfig full = load_config(kRoot / "configs" / "paper.cfg");
  CHECK(full.n_wdm_channels == 11);
  CHECK(full.baud == 32e9);
  CHECK(full.grid_spacing_hz == 37.5e9);
  CHECK(full.pilot_rate == 0.05);
  CHECK(full.rolloff == 0.01);
  CHECK(full.tx_samples_per_symbol == 16);
  CHECK(full.fiber.step_m == 100);
  CHECK(full.spans == std::vector<int>{24});
  CHECK(full.n_blocks == 18);
  CHECK(full.nlms.n_taps == 13);
  CHECK(full.turbo.L == 2);
  CHECK(full.turbo.n1 + full.turbo.n2 + 1 == 3);
  CHECK(full.turbo.lambda == 0.99);
  CHECK(full.turbo.decoder_iters == 50);
  CHECK(full.n_trials == 5);
  const LdpcCode code = LdpcCode::load(full.code_file);
  CHECK(code.n() == 20480);
  CHECK(code.k() == 16384);

  const CampaignConfig p64 = load_config(kRoot / "configs" / "paper_64qam.cfg");
  CHECK(p64.modulation == "64qam");
  CHECK(p64.spans == std::vector<int>{80});

  CHECK_THROWS_AS(load_config(kRoot / "configs" / "missing.cfg"), std::runtime_error);
}

TEST_CASE("mode names and cell seeds") {
  for (auto m : {ReceiverMode::edc, ReceiverMode::dbp, ReceiverMode::dbp_turbo})
    CHECK(mode_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(mode_from_string("mlse"), std::invalid_argument);

  std::set<std::uint64_t> seeds;
  for (double p : {-2.0, 0.0, 0.5, 2.0})
    for (int s : {1, 10, 80})
      for (int t = 0; t < 5; ++t) seeds.insert(cell_seed(1, p, s, t));
  CHECK(seeds.size() == 60);
  CHECK(cell_seed(1, 0.0, 10, 0) == cell_seed(1, 0.0, 10, 0));
  CHECK(cell_seed(1, 0.0, 10, 0) != cell_seed(2, 0.0, 10, 0));
}

TEST_CASE("linear link trial") {
  const CampaignConfig c = small_config();
  const LdpcCode code = LdpcCode::load(c.code_file);
  const TrialOutput a = run_trial(c, code, 0.0, 1, 0, c.modes);
  // edc, dbp: one record each; dbp_turbo: iterations 0..2
  REQUIRE(a.records.size() == 5);
  for (const auto& r : a.records) {
    CHECK(r.status == "ok");
    CHECK(r.bit_errors == 0);
    CHECK(r.n_bits_counted == 2 * 2 * code.k());
    CHECK(r.snr_db > 20.0);
    CHECK(r.seed == cell_seed(7, 0.0, 1, 0));
  }
  CHECK(a.records[0].mode == "edc");
  CHECK(a.records[4].mode == "dbp_turbo");
  CHECK(a.records[4].turbo_iteration == 2);
  CHECK(!a.diagnostics.empty());

  const TrialOutput b = run_trial(c, code, 0.0, 1, 0, c.modes);
  REQUIRE(b.records.size() == a.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) CHECK(same(a.records[i], b.records[i]));
  CHECK(a.diagnostics == b.diagnostics);

  // one mode alone sees the same transmitted data and noise
  const ReceiverMode only[] = {ReceiverMode::dbp};
  const TrialOutput d = run_trial(c, code, 0.0, 1, 0, only);
  REQUIRE(d.records.size() == 1);
  CHECK(same(d.records[0], a.records[1]));
}

TEST_CASE("early stop carries the last state forward") {
  CampaignConfig c = small_config("[receiver]\nbypass_sync = true\n");
  apply_override(c, "turbo.stop_when_decoded", "true");
  apply_override(c, "turbo.iterations", "3");
  const LdpcCode code = LdpcCode::load(c.code_file);
  const ReceiverMode only[] = {ReceiverMode::dbp_turbo};
  const TrialOutput out = run_trial(c, code, 0.0, 1, 0, only);
  REQUIRE(out.records.size() == 4);
  for (int k = 0; k < 4; ++k) {
    CHECK(out.records[k].turbo_iteration == k);
    CHECK(out.records[k].bit_errors == 0);
    CHECK(out.records[k].snr_db == out.records[0].snr_db);
  }
}

TEST_CASE("campaign: parallelism, failures, ordering") {
  CampaignConfig c = small_config();
  apply_override(c, "sweep.power_dbm", "-1, 1");
  apply_override(c, "sweep.trials", "2");
  apply_override(c, "sweep.modes", "edc, dbp");
  const CampaignResult one = run_campaign(c, 1);
  const CampaignResult three = run_campaign(c, 3);
  CHECK(one.failed_cells == 0);
  REQUIRE(one.records.size() == 8);
  REQUIRE(three.records.size() == 8);
  for (std::size_t i = 0; i < 8; ++i) CHECK(same(one.records[i], three.records[i]));
  CHECK(one.records[0].launch_power_dbm == -1.0);
  CHECK(one.records[0].mode == "edc");
  CHECK(one.records[1].mode == "edc");
  CHECK(one.records[1].trial == 1);
  CHECK(one.records[2].mode == "dbp");
  CHECK(one.records[4].launch_power_dbm == 1.0);

  apply_override(c, "fiber.gamma_per_w_km", "1.3");
  apply_override(c, "sweep.power_dbm", "0, 5000");
  apply_override(c, "sweep.trials", "1");
  const CampaignResult partial = run_campaign(c, 2);
  CHECK(partial.failed_cells == 1);
  REQUIRE(partial.records.size() == 4);
  CHECK(partial.records[0].status == "ok");
  CHECK(partial.records[1].status == "ok");
  CHECK(partial.records[2].status == "failed");
  CHECK(partial.records[3].status == "failed");
  CHECK(!partial.records[2].error.empty());
  CHECK(partial.records[3].mode == "dbp");

  const auto rows = aggregate_power(partial.records);
  CHECK(rows.size() == 2);
}

TEST_CASE("results file round trip") {
  std::vector<MetricsRecord> recs{rec(0.0, "edc", 0, 12.25, 3), rec(1.0, "dbp_turbo", 2, 15.125)};
  recs[1].status = "failed";
  recs[1].error = "overflow, \"quoted\"";
  const fs::path path = fs::temp_directory_path() / "wdmturbo_results_roundtrip.jsonl";
  write_results(recs, path);
  const auto back = read_results(path);
  fs::remove(path);
  REQUIRE(back.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(same(back[i], recs[i]));
  CHECK_THROWS_AS(read_results(kRoot / "no" / "such.jsonl"), std::runtime_error);
}

TEST_CASE("aggregation and tables") {
  {
    std::ostringstream out;
    emit_table({}, "fig2", out);
    CHECK(out.str() == "power_dbm,n_spans,mode,iteration,post_fec_ber,snr_db,gmi,n_trials\n");
    std::ostringstream reach;
    emit_table({}, "fig3", reach);
    CHECK(reach.str() == "n_spans,mode,optimal_power_dbm,iteration,post_fec_ber,snr_db,gmi\n");
  }
  {
    const auto rows = aggregate_power({rec(0.0, "dbp", 0, 14.0, 2)});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].n_trials == 1);
    CHECK(rows[0].post_fec_ber == doctest::Approx(0.002));
  }

  std::vector<MetricsRecord> recs;
  for (double p : {-1.0, 1.0, 3.0}) {
    const double bump = p == 1.0 ? 1.0 : 0.0;
    recs.push_back(rec(p, "edc", 0, 10.0 + bump, 10));
    recs.push_back(rec(p, "edc", 0, 10.5 + bump, 30));
    recs.push_back(rec(p, "dbp_turbo", 0, 11.0 + bump));
    // the turbo optimum sits at 3 dBm once iterated
    recs.push_back(rec(p, "dbp_turbo", 1, 11.5 + bump + (p == 3.0 ? 2.0 : 0.0)));
  }
  recs.push_back(rec(1.0, "edc", 0, 99.0));
  recs.back().status = "failed";

  const auto rows = aggregate_power(recs);
  REQUIRE(rows.size() == 9);
  CHECK(rows[0].mode == "edc");
  CHECK(rows[0].power_dbm == -1.0);
  CHECK(rows[0].n_trials == 2);
  CHECK(rows[0].post_fec_ber == doctest::Approx(0.02));
  CHECK(rows[0].snr_db == doctest::Approx(10.25));
  CHECK(rows[1].snr_db == doctest::Approx(11.25));
  CHECK(rows[3].mode == "dbp_turbo");
  CHECK(rows[3].iteration == 0);
  CHECK(rows[6].iteration == 1);

  std::stringstream csv;
  write_power_csv(rows, csv);
  const auto parsed = parse_power_csv(csv);
  REQUIRE(parsed.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(parsed[i].power_dbm == rows[i].power_dbm);
    CHECK(parsed[i].mode == rows[i].mode);
    CHECK(parsed[i].iteration == rows[i].iteration);
    CHECK(parsed[i].post_fec_ber == rows[i].post_fec_ber);
    CHECK(parsed[i].snr_db == rows[i].snr_db);
    CHECK(parsed[i].gmi == rows[i].gmi);
    CHECK(parsed[i].n_trials == rows[i].n_trials);
  }

  const auto reach = reach_table(rows);
  REQUIRE(reach.size() == 3);
  CHECK(reach[0].mode == "edc");
  CHECK(reach[0].optimal_power_dbm == 1.0);
  CHECK(reach[1].mode == "dbp_turbo");
  CHECK(reach[1].optimal_power_dbm == 3.0);
  CHECK(reach[1].iteration == 0);
  CHECK(reach[2].iteration == 1);
  CHECK(reach[2].snr_db == doctest::Approx(13.5));

  std::stringstream rcsv;
  write_reach_csv(reach, rcsv);
  const auto rparsed = parse_reach_csv(rcsv);
  REQUIRE(rparsed.size() == 3);
  CHECK(rparsed[2].snr_db == reach[2].snr_db);
  CHECK(rparsed[2].optimal_power_dbm == 3.0);

  std::ostringstream sink;
  CHECK_THROWS_AS(emit_table(recs, "fig7", sink), std::invalid_argument);
  std::istringstream wrong("n_spans,mode\n");
  CHECK_THROWS_AS(parse_power_csv(wrong), std::invalid_argument);
  std::istringstream short_row("power_dbm,n_spans,mode,iteration,post_fec_ber,snr_db,gmi,n_trials\n1,2,edc\n");
  CHECK_THROWS_AS(parse_power_csv(short_row), std::invalid_argument);
}
