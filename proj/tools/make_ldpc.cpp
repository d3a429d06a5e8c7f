// Generates the parity-check files under data/codes.
#include <CLI11.hpp>
#include <algorithm>
#include <iostream>
#include <set>
#include <utility>

#include "wdmturbo/fec.hpp"
#include "wdmturbo/random.hpp"

using namespace wdmturbo;

namespace {

using Rows = std::vector<std::vector<std::uint32_t>>;

// Info columns of weight w over balanced rows, avoiding length-4 cycles where
// possible, plus a dual-diagonal accumulator on the last m columns.
Rows ira(std::size_t n, std::size_t m, int w, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t k = n - m;
  Rows rows(m);
  std::set<std::pair<std::uint32_t, std::uint32_t>> pairs;
  for (std::uint32_t r = 0; r + 1 < m; ++r) pairs.insert({r, r + 1});
  std::vector<std::size_t> degree(m, 0);
  for (std::uint32_t col = 0; col < k; ++col) {
    std::vector<std::uint32_t> chosen;
    for (int e = 0; e < w; ++e) {
      std::vector<std::uint32_t> order(m);
      for (std::uint32_t r = 0; r < m; ++r) order[r] = r;
      for (std::size_t i = m; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return degree[a] < degree[b]; });
      std::uint32_t pick = m;
      for (int relaxed = 0; relaxed < 2 && pick == m; ++relaxed)
        for (std::uint32_t r : order) {
          if (std::find(chosen.begin(), chosen.end(), r) != chosen.end()) continue;
          bool cycle = false;
          for (std::uint32_t c : chosen) cycle |= pairs.count({std::min(r, c), std::max(r, c)}) > 0;
          if (cycle && relaxed == 0) continue;
          pick = r;
          break;
        }
      for (std::uint32_t c : chosen) pairs.insert({std::min(pick, c), std::max(pick, c)});
      chosen.push_back(pick);
      ++degree[pick];
      rows[pick].push_back(col);
    }
  }
  for (std::uint32_t j = 0; j < m; ++j) {
    const auto col = static_cast<std::uint32_t>(k + j);
    rows[j].push_back(col);
    if (j + 1 < m) rows[j + 1].push_back(col);
  }
  for (auto& r : rows) std::sort(r.begin(), r.end());
  return rows;
}

// (wc, wr)-regular code by random socket matching; retried until the matrix
// has no repeated entries and full row rank.
LdpcCode regular(std::size_t n, std::size_t m, int wc, std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t edges = n * static_cast<std::size_t>(wc);
  if (edges % m != 0) throw std::invalid_argument("regular: n * wc must be divisible by m");
  for (int attempt = 0; attempt < 100000; ++attempt) {
    std::vector<std::uint32_t> sockets(edges);
    for (std::size_t e = 0; e < edges; ++e) sockets[e] = static_cast<std::uint32_t>(e / static_cast<std::size_t>(wc));
    for (std::size_t i = edges; i > 1; --i) std::swap(sockets[i - 1], sockets[rng.index(i)]);
    const std::size_t wr = edges / m;
    Rows rows(m);
    bool ok = true;
    for (std::size_t r = 0; r < m && ok; ++r) {
      for (std::size_t e = 0; e < wr; ++e) rows[r].push_back(sockets[r * wr + e]);
      std::sort(rows[r].begin(), rows[r].end());
      ok = std::adjacent_find(rows[r].begin(), rows[r].end()) == rows[r].end();
    }
    if (!ok) continue;
    LdpcCode code(n, rows);
    if (code.k() == n - m) return code;
  }
  throw std::runtime_error("regular: no full-rank matrix found");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LDPC parity-check matrix generator"};
  std::size_t n = 0, m = 0;
  int wc = 3;
  std::uint64_t seed = 1;
  std::string kind = "ira", out;
  app.add_option("--n", n, "block length")->required();
  app.add_option("--m", m, "parity checks")->required();
  app.add_option("--col-weight", wc, "information column weight");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--kind", kind, "ira or regular")->check(CLI::IsMember({"ira", "regular"}));
  app.add_option("--out", out, "output file")->required();
  CLI11_PARSE(app, argc, argv);
  try {
    const LdpcCode code = kind == "ira" ? LdpcCode(n, ira(n, m, wc, seed)) : regular(n, m, wc, seed);
    code.save(out);
    std::cout << out << ": n=" << code.n() << " m=" << code.m() << " k=" << code.k() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "make_ldpc: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
