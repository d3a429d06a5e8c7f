#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "wdmturbo/harness.hpp"

using namespace wdmturbo;
namespace fs = std::filesystem;

namespace {

struct RunArgs {
  std::string config;
  std::string out;
  int jobs = 0;
  std::optional<std::uint64_t> seed;
  bool diagnostics = false;
};

void add_run_options(CLI::App* cmd, RunArgs& a) {
  cmd->add_option("--config", a.config, "campaign configuration file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", a.out, "output directory")->required();
  cmd->add_option("--jobs", a.jobs, "concurrent cells (0: all cores)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", a.seed, "base seed override");
  cmd->add_flag("--diagnostics", a.diagnostics, "write per-block decoder diagnostics");
}

int execute(CampaignConfig cfg, const RunArgs& a) {
  if (a.seed) cfg.base_seed = *a.seed;
  cfg.validate();
  fs::create_directories(a.out);
  const CampaignResult res = run_campaign(cfg, a.jobs);
  const fs::path results = fs::path(a.out) / "results.jsonl";
  write_results(res.records, results);
  if (a.diagnostics) {
    std::ofstream d(fs::path(a.out) / "diagnostics.jsonl");
    for (const auto& line : res.diagnostics) d << line << '\n';
  }
  std::cout << results.string() << ": " << res.records.size() << " records";
  if (res.failed_cells) std::cout << ", " << res.failed_cells << " failed cells";
  std::cout << '\n';
  return res.failed_cells ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"WDM turbo-equalization simulator"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run the campaign described by a config file");
  add_run_options(run, run_args);

  RunArgs sweep_args;
  std::string powers, spans, modes;
  std::optional<int> trials;
  std::vector<std::string> sets;
  auto* sweep = app.add_subcommand("sweep", "run a campaign with sweep axes overridden");
  add_run_options(sweep, sweep_args);
  sweep->add_option("--power", powers, "launch powers in dBm, comma-separated");
  sweep->add_option("--spans", spans, "span counts, comma-separated");
  sweep->add_option("--modes", modes, "receiver modes: edc, dbp, dbp_turbo");
  sweep->add_option("--trials", trials, "Monte Carlo trials per cell");
  sweep->add_option("--set", sets, "section.key=value overrides");

  std::string results, figure, table_out;
  auto* tables = app.add_subcommand("tables", "emit a plot-ready CSV from a results file");
  tables->add_option("--results", results, "results.jsonl")->required()->check(CLI::ExistingFile);
  tables->add_option("--figure", figure, "fig2, fig3, fig4, fig5 or fig6")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5", "fig6"}));
  tables->add_option("--out", table_out, "CSV file (default: stdout)");

  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*run) return execute(load_config(run_args.config), run_args);
    if (*sweep) {
      CampaignConfig cfg = load_config(sweep_args.config);
      if (!powers.empty()) apply_override(cfg, "sweep.power_dbm", powers);
      if (!spans.empty()) apply_override(cfg, "sweep.spans", spans);
      if (!modes.empty()) apply_override(cfg, "sweep.modes", modes);
      if (trials) apply_override(cfg, "sweep.trials", std::to_string(*trials));
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects section.key=value, got " + s);
        apply_override(cfg, s.substr(0, eq), s.substr(eq + 1));
      }
      return execute(cfg, sweep_args);
    }
    if (*tables) {
      const auto records = read_results(results);
      if (table_out.empty()) {
        emit_table(records, figure, std::cout);
      } else {
        std::ofstream out(table_out);
        if (!out) throw std::runtime_error("cannot write " + table_out);
        emit_table(records, figure, out);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "wdmturbo: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
