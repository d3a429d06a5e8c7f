#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "wdmturbo/harness.hpp"
#include "wdmturbo/random.hpp"

namespace wdmturbo {
namespace {

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  boost::split(parts, v, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = boost::to_lower_copy(boost::trim_copy(v));
  if (t == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double d = std::stod(t, &used);
    if (used == t.size()) return d;
  } catch (const std::exception&) {
  }
  throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
}

long long to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw std::invalid_argument("config: " + key + " expects an integer, got '" + v + "'");
  return static_cast<long long>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = boost::to_lower_copy(boost::trim_copy(v));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw std::invalid_argument("config: " + key + " expects a boolean, got '" + v + "'");
}

Feedback feedback_from(const std::string& v) {
  const std::string t = boost::to_lower_copy(boost::trim_copy(v));
  if (t == "a_posteriori") return Feedback::a_posteriori;
  if (t == "extrinsic") return Feedback::extrinsic;
  if (t == "none") return Feedback::none;
  throw std::invalid_argument("config: turbo.feedback must be a_posteriori, extrinsic or none");
}

}  // namespace

std::string to_string(ReceiverMode m) {
  switch (m) {
    case ReceiverMode::edc: return "edc";
    case ReceiverMode::dbp: return "dbp";
    case ReceiverMode::dbp_turbo: return "dbp_turbo";
  }
  return "?";
}

ReceiverMode mode_from_string(const std::string& s) {
  const std::string t = boost::to_lower_copy(boost::trim_copy(s));
  if (t == "edc") return ReceiverMode::edc;
  if (t == "dbp") return ReceiverMode::dbp;
  if (t == "dbp_turbo") return ReceiverMode::dbp_turbo;
  throw std::invalid_argument("unknown receiver mode '" + s + "'");
}

void apply_override(CampaignConfig& c, const std::string& key, const std::string& value) {
  const std::string k = boost::to_lower_copy(boost::trim_copy(key));
  const std::string v = boost::trim_copy(value);
  auto num = [&] { return to_double(k, v); };
  auto integer = [&] { return to_int(k, v); };

  if (k == "link.modulation") c.modulation = boost::to_lower_copy(v);
  else if (k == "link.channels") c.n_wdm_channels = static_cast<int>(integer());
  else if (k == "link.baud") c.baud = num();
  else if (k == "link.spacing_hz") c.grid_spacing_hz = num();
  else if (k == "link.pilot_rate") c.pilot_rate = num();
  else if (k == "link.rolloff") c.rolloff = num();
  else if (k == "link.samples_per_symbol") c.tx_samples_per_symbol = static_cast<int>(integer());
  else if (k == "fiber.alpha_db_per_km") c.fiber.alpha_db_per_km = num();
  else if (k == "fiber.gamma_per_w_km") c.fiber.gamma_per_w_km = num();
  else if (k == "fiber.dispersion_ps_nm_km") c.fiber.dispersion_ps_nm_km = num();
  else if (k == "fiber.span_km") c.fiber.span_km = num();
  else if (k == "fiber.nf_db") c.fiber.nf_db = num();
  else if (k == "fiber.step_m") c.fiber.step_m = num();
  else if (k == "fiber.wavelength_nm") c.fiber.center_wavelength_nm = num();
  else if (k == "fiber.dbp_step_m") c.dbp_step_m = num();
  else if (k == "code.file") c.code_file = v;
  else if (k == "code.blocks") c.n_blocks = static_cast<std::size_t>(integer());
  else if (k == "code.skip_leading") c.skip_leading_blocks = static_cast<std::size_t>(integer());
  else if (k == "code.skip_trailing") c.skip_trailing_blocks = static_cast<std::size_t>(integer());
  else if (k == "sweep.power_dbm") {
    c.powers_dbm.clear();
    for (const auto& p : split_list(v)) c.powers_dbm.push_back(to_double(k, p));
  } else if (k == "sweep.spans") {
    c.spans.clear();
    for (const auto& p : split_list(v)) c.spans.push_back(static_cast<int>(to_int(k, p)));
  } else if (k == "sweep.modes") {
    c.modes.clear();
    for (const auto& p : split_list(v)) c.modes.push_back(mode_from_string(p));
  } else if (k == "sweep.trials") c.n_trials = static_cast<int>(integer());
  else if (k == "sweep.seed") c.base_seed = static_cast<std::uint64_t>(integer());
  else if (k == "receiver.nlms_taps") c.nlms.n_taps = static_cast<int>(integer());
  else if (k == "receiver.nlms_step") c.nlms.step_size = num();
  else if (k == "receiver.nlms_training_blocks") c.nlms.training_blocks = static_cast<int>(integer());
  else if (k == "receiver.nlms_training_passes") c.nlms.training_passes = static_cast<int>(integer());
  else if (k == "receiver.pll_bandwidth") c.pll.bandwidth = num();
  else if (k == "receiver.pll_damping") c.pll.damping = num();
  else if (k == "receiver.bypass_sync") c.bypass_sync = to_bool(k, v);
  else if (k == "turbo.n1") c.turbo.n1 = static_cast<int>(integer());
  else if (k == "turbo.n2") c.turbo.n2 = static_cast<int>(integer());
  else if (k == "turbo.l") c.turbo.L = static_cast<int>(integer());
  else if (k == "turbo.lambda") c.turbo.lambda = num();
  else if (k == "turbo.delta") c.turbo.delta = num();
  else if (k == "turbo.noise_var") c.turbo.noise_var = num();
  else if (k == "turbo.iterations") c.turbo.n_turbo_iters = static_cast<int>(integer());
  else if (k == "turbo.decoder_iterations") c.turbo.decoder_iters = static_cast<int>(integer());
  else if (k == "turbo.feedback") c.turbo.feedback = feedback_from(v);
  else if (k == "turbo.stop_when_decoded") c.turbo.stop_when_decoded = to_bool(k, v);
  else if (k == "turbo.training_blocks") c.turbo.training_blocks = static_cast<int>(integer());
  else if (k == "turbo.nlms_step") c.turbo.nlms_step = num();
  else if (k == "turbo.nlms_passes") c.turbo.nlms_passes = static_cast<int>(integer());
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

CampaignConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  CampaignConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw std::invalid_argument("config: key '" + section + "' outside a section");
    for (const auto& [key, value] : body) apply_override(c, section + "." + key, value.data());
  }
  if (!c.code_file.empty() && c.code_file.is_relative()) c.code_file = base_dir / c.code_file;
  c.validate();
  return c;
}

CampaignConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_config(in, path.parent_path());
}

void CampaignConfig::validate() const {
  auto bad = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
  Constellation::from_name(modulation);
  if (n_wdm_channels < 1 || n_wdm_channels % 2 == 0) bad("link.channels must be odd (center channel at 0 Hz)");
  if (!(baud > 0.0)) bad("link.baud must be positive");
  if (n_wdm_channels > 1 && !(grid_spacing_hz > 0.0)) bad("link.spacing_hz must be positive");
  if (!(pilot_rate > 0.0 && pilot_rate <= 1.0)) bad("link.pilot_rate must be in (0, 1]");
  if (!(rolloff > 0.0 && rolloff <= 1.0)) bad("link.rolloff must be in (0, 1]");
  if (tx_samples_per_symbol < 2) bad("link.samples_per_symbol must be >= 2");
  fiber.validate();
  if (!(dbp_step_m > 0.0)) bad("fiber.dbp_step_m must be positive");
  if (code_file.empty()) bad("code.file is required");
  if (!std::filesystem::exists(code_file)) bad("code file " + code_file.string() + " does not exist");
  if (n_blocks <= skip_leading_blocks + skip_trailing_blocks) bad("code.blocks too small for the counting policy");
  if (powers_dbm.empty() || spans.empty() || modes.empty()) bad("sweep axes must be non-empty");
  for (int s : spans)
    if (s < 1) bad("sweep.spans entries must be >= 1");
  if (n_trials < 1) bad("sweep.trials must be >= 1");
  turbo.validate();
  if (static_cast<std::size_t>(turbo.training_blocks) > skip_leading_blocks)
    bad("turbo.training_blocks must not exceed code.skip_leading");
  if (nlms.training_blocks < 0 || static_cast<std::size_t>(nlms.training_blocks) > skip_leading_blocks)
    bad("receiver.nlms_training_blocks must be in [0, code.skip_leading]");
}

std::uint64_t cell_seed(std::uint64_t base_seed, double power_dbm, int n_spans, int trial) {
  std::uint64_t s = mix_seed(base_seed, power_dbm);
  s = mix_seed(s, static_cast<std::uint64_t>(n_spans));
  return mix_seed(s, static_cast<std::uint64_t>(trial));
}

}  // namespace wdmturbo
