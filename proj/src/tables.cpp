#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "wdmturbo/harness.hpp"

namespace wdmturbo {
namespace {

int mode_rank(const std::string& m) {
  try {
    return static_cast<int>(mode_from_string(m));
  } catch (const std::invalid_argument&) {
    return 100;
  }
}

std::vector<std::string> fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

double num(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw std::invalid_argument("table: bad number '" + s + "'");
  return v;
}

constexpr const char* kPowerHeader = "power_dbm,n_spans,mode,iteration,post_fec_ber,snr_db,gmi,n_trials";
constexpr const char* kReachHeader = "n_spans,mode,optimal_power_dbm,iteration,post_fec_ber,snr_db,gmi";

template <typename Row, typename Parse>
std::vector<Row> parse_rows(std::istream& in, const char* header, std::size_t width, Parse parse) {
  std::string line;
  if (!std::getline(in, line) || line != header) throw std::invalid_argument("table: unexpected header");
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = fields(line);
    if (f.size() != width) throw std::invalid_argument("table: wrong column count in '" + line + "'");
    rows.push_back(parse(f));
  }
  return rows;
}

}  // namespace

std::vector<PowerRow> aggregate_power(const std::vector<MetricsRecord>& records) {
  struct Acc {
    std::size_t errors = 0, counted = 0;
    double snr = 0.0, gmi = 0.0;
    int n = 0;
  };
  using Key = std::tuple<int, int, int, double, std::string>;  // spans, mode rank, iteration, power, mode
  std::map<Key, Acc> acc;
  for (const auto& r : records) {
    if (r.status != "ok") continue;
    Acc& a = acc[{r.n_spans, mode_rank(r.mode), r.turbo_iteration, r.launch_power_dbm, r.mode}];
    a.errors += r.bit_errors;
    a.counted += r.n_bits_counted;
    a.snr += r.snr_db;
    a.gmi += r.gmi_bits_per_4d_symbol;
    ++a.n;
  }
  std::vector<PowerRow> rows;
  for (const auto& [k, a] : acc) {
    PowerRow row;
    row.n_spans = std::get<0>(k);
    row.iteration = std::get<2>(k);
    row.power_dbm = std::get<3>(k);
    row.mode = std::get<4>(k);
    row.post_fec_ber = a.counted ? static_cast<double>(a.errors) / static_cast<double>(a.counted) : 0.0;
    row.snr_db = a.snr / a.n;
    row.gmi = a.gmi / a.n;
    row.n_trials = a.n;
    rows.push_back(row);
  }
  return rows;
}

std::vector<ReachRow> reach_table(const std::vector<PowerRow>& rows) {
  using Key = std::tuple<int, int, std::string>;
  std::map<Key, int> last_iter;
  for (const auto& r : rows) {
    auto [it, fresh] = last_iter.try_emplace({r.n_spans, mode_rank(r.mode), r.mode}, r.iteration);
    if (!fresh) it->second = std::max(it->second, r.iteration);
  }
  std::vector<ReachRow> out;
  for (const auto& [k, iter] : last_iter) {
    const auto& [spans, rank, mode] = k;
    const PowerRow* best = nullptr;
    for (const auto& r : rows)
      if (r.n_spans == spans && r.mode == mode && r.iteration == iter && (!best || r.snr_db > best->snr_db)) best = &r;
    if (!best) continue;
    for (const auto& r : rows)
      if (r.n_spans == spans && r.mode == mode && r.power_dbm == best->power_dbm)
        out.push_back({spans, mode, best->power_dbm, r.iteration, r.post_fec_ber, r.snr_db, r.gmi});
    (void)rank;
  }
  return out;
}

void write_power_csv(const std::vector<PowerRow>& rows, std::ostream& out) {
  out << kPowerHeader << '\n';
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%s,%d,%.17g,%.17g,%.17g,%d", r.power_dbm, r.n_spans, r.mode.c_str(),
                  r.iteration, r.post_fec_ber, r.snr_db, r.gmi, r.n_trials);
    out << buf << '\n';
  }
}

std::vector<PowerRow> parse_power_csv(std::istream& in) {
  return parse_rows<PowerRow>(in, kPowerHeader, 8, [](const std::vector<std::string>& f) {
    return PowerRow{num(f[0]), static_cast<int>(num(f[1])), f[2], static_cast<int>(num(f[3])),
                    num(f[4]), num(f[5]), num(f[6]), static_cast<int>(num(f[7]))};
  });
}

void write_reach_csv(const std::vector<ReachRow>& rows, std::ostream& out) {
  out << kReachHeader << '\n';
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.17g,%d,%.17g,%.17g,%.17g", r.n_spans, r.mode.c_str(), r.optimal_power_dbm,
                  r.iteration, r.post_fec_ber, r.snr_db, r.gmi);
    out << buf << '\n';
  }
}

std::vector<ReachRow> parse_reach_csv(std::istream& in) {
  return parse_rows<ReachRow>(in, kReachHeader, 7, [](const std::vector<std::string>& f) {
    return ReachRow{static_cast<int>(num(f[0])), f[1], num(f[2]), static_cast<int>(num(f[3])),
                    num(f[4]), num(f[5]), num(f[6])};
  });
}

void emit_table(const std::vector<MetricsRecord>& records, const std::string& figure, std::ostream& out) {
  if (figure == "fig2" || figure == "fig4" || figure == "fig5") {
    write_power_csv(aggregate_power(records), out);
  } else if (figure == "fig3" || figure == "fig6") {
    write_reach_csv(reach_table(aggregate_power(records)), out);
  } else {
    throw std::invalid_argument("unknown figure '" + figure + "' (fig2..fig6)");
  }
}

}  // namespace wdmturbo
