#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "parallel.hpp"
#include "wdmturbo/fec.hpp"

namespace wdmturbo {

LdpcCode::LdpcCode(std::size_t n, std::vector<std::vector<std::uint32_t>> rows)
    : n_(n), rows_(std::move(rows)) {
  if (n_ == 0) throw std::invalid_argument("LdpcCode: n must be positive");
  cols_.assign(n_, {});
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    auto sorted = rows_[r];
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("LdpcCode: duplicate column index in row " + std::to_string(r));
    for (auto c : rows_[r]) {
      if (c >= n_) throw std::invalid_argument("LdpcCode: column index out of range in row " + std::to_string(r));
      cols_[c].push_back(static_cast<std::uint32_t>(r));
    }
  }
  build_encoder();
}

LdpcCode LdpcCode::parse(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("parity-check file: missing header");
  std::istringstream hdr(line);
  std::size_t n = 0, m = 0;
  if (!(hdr >> n >> m)) throw std::runtime_error("parity-check file: bad header '" + line + "'");
  std::vector<std::vector<std::uint32_t>> rows(m);
  for (std::size_t r = 0; r < m; ++r) {
    if (!std::getline(in, line))
      throw std::runtime_error("parity-check file: expected " + std::to_string(m) + " rows, got " + std::to_string(r));
    std::istringstream ls(line);
    long long v;
    while (ls >> v) {
      if (v < 0) throw std::runtime_error("parity-check file: negative column index");
      rows[r].push_back(static_cast<std::uint32_t>(v));
    }
    if (!ls.eof()) throw std::runtime_error("parity-check file: malformed row " + std::to_string(r));
  }
  return LdpcCode(n, std::move(rows));
}

LdpcCode LdpcCode::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open parity-check file " + path.string());
  return parse(in);
}

void LdpcCode::write(std::ostream& out) const {
  out << n_ << ' ' << rows_.size() << '\n';
  for (const auto& row : rows_) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << ' ';
      out << row[j];
    }
    out << '\n';
  }
}

void LdpcCode::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write(out);
}

void LdpcCode::build_encoder() {
  const std::size_t words = (n_ + 63) / 64;
  const std::size_t m = rows_.size();
  std::vector<std::vector<std::uint64_t>> dense(m, std::vector<std::uint64_t>(words, 0));
  for (std::size_t r = 0; r < m; ++r)
    for (auto c : rows_[r]) dense[r][c / 64] ^= (1ULL << (c % 64));

  // Gauss-Jordan over GF(2), pivots searched from the last column down so
  // that parity positions land at the tail when the structure allows it.
  std::vector<std::uint32_t> pivot_cols;
  std::vector<std::uint8_t> is_pivot(n_, 0);
  std::size_t rank = 0;
  for (std::size_t col = n_; col-- > 0 && rank < m;) {
    const std::size_t w = col / 64;
    const std::uint64_t bit = 1ULL << (col % 64);
    std::size_t sel = rank;
    while (sel < m && !(dense[sel][w] & bit)) ++sel;
    if (sel == m) continue;
    std::swap(dense[rank], dense[sel]);
    for (std::size_t r = 0; r < m; ++r) {
      if (r != rank && (dense[r][w] & bit))
        for (std::size_t j = 0; j < words; ++j) dense[r][j] ^= dense[rank][j];
    }
    pivot_cols.push_back(static_cast<std::uint32_t>(col));
    is_pivot[col] = 1;
    ++rank;
  }

  info_positions_.clear();
  for (std::size_t c = 0; c < n_; ++c)
    if (!is_pivot[c]) info_positions_.push_back(static_cast<std::uint32_t>(c));
  parity_positions_ = pivot_cols;

  const std::size_t k = info_positions_.size();
  const std::size_t iwords = (k + 63) / 64;
  parity_rows_.assign(rank, std::vector<std::uint64_t>(iwords, 0));
  for (std::size_t r = 0; r < rank; ++r) {
    for (std::size_t j = 0; j < k; ++j) {
      const auto c = info_positions_[j];
      if (dense[r][c / 64] & (1ULL << (c % 64))) parity_rows_[r][j / 64] |= (1ULL << (j % 64));
    }
  }
}

Bits LdpcCode::encode(std::span<const std::uint8_t> info) const {
  const std::size_t k = this->k();
  if (info.size() != k)
    throw std::invalid_argument("encode: expected " + std::to_string(k) + " info bits, got " + std::to_string(info.size()));
  std::vector<std::uint64_t> packed((k + 63) / 64, 0);
  for (std::size_t j = 0; j < k; ++j)
    if (info[j] & 1U) packed[j / 64] |= (1ULL << (j % 64));
  Bits cw(n_, 0);
  for (std::size_t j = 0; j < k; ++j) cw[info_positions_[j]] = info[j] & 1U;
  for (std::size_t r = 0; r < parity_rows_.size(); ++r) {
    int acc = 0;
    for (std::size_t w = 0; w < packed.size(); ++w) acc ^= std::popcount(parity_rows_[r][w] & packed[w]) & 1;
    cw[parity_positions_[r]] = static_cast<std::uint8_t>(acc);
  }
  return cw;
}

Bits LdpcCode::extract_info(std::span<const std::uint8_t> codeword) const {
  if (codeword.size() != n_) throw std::invalid_argument("extract_info: wrong codeword length");
  Bits info(k());
  for (std::size_t j = 0; j < info.size(); ++j) info[j] = codeword[info_positions_[j]];
  return info;
}

std::size_t LdpcCode::unsatisfied_checks(std::span<const std::uint8_t> word) const {
  if (word.size() != n_) throw std::invalid_argument("unsatisfied_checks: wrong word length");
  std::size_t bad = 0;
  for (const auto& row : rows_) {
    int acc = 0;
    for (auto c : row) acc ^= word[c] & 1;
    bad += static_cast<std::size_t>(acc);
  }
  return bad;
}

DecodeResult decode(const LlrBlock& llrs, const LdpcCode& code, int max_iter) {
  const std::size_t n = code.n();
  if (llrs.values.size() != n)
    throw std::invalid_argument("decode: expected " + std::to_string(n) + " L-values, got " + std::to_string(llrs.values.size()));
  if (max_iter < 1) throw std::invalid_argument("decode: max_iter must be >= 1");

  const auto& rows = code.rows();
  const auto& cols = code.columns();

  // Edge e enumerates (check, position) in row order; var_edges maps back.
  std::vector<std::size_t> row_start(rows.size() + 1, 0);
  for (std::size_t r = 0; r < rows.size(); ++r) row_start[r + 1] = row_start[r] + rows[r].size();
  const std::size_t n_edges = row_start.back();
  std::vector<std::uint32_t> edge_var(n_edges);
  std::vector<std::vector<std::size_t>> var_edges(n);
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t j = 0; j < rows[r].size(); ++j) {
      edge_var[row_start[r] + j] = rows[r][j];
      var_edges[rows[r][j]].push_back(row_start[r] + j);
    }
  (void)cols;

  // Internally lambda = ln P0/P1 (the usual tanh-rule sign).
  RVec channel(n);
  for (std::size_t v = 0; v < n; ++v) {
    const double l = llrs.values[v];
    if (std::isnan(l)) throw std::invalid_argument("decode: NaN L-value");
    channel[v] = -std::clamp(l, -kLlrClip, kLlrClip);
  }

  RVec v2c(n_edges), c2v(n_edges, 0.0), total(channel);
  for (std::size_t e = 0; e < n_edges; ++e) v2c[e] = channel[edge_var[e]];
  RVec tanh_buf, prefix;

  DecodeResult res;
  res.bits.assign(n, 0);
  constexpr double kTanhLimit = 1.0 - 1e-15;

  for (int it = 1; it <= max_iter; ++it) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::size_t b = row_start[r], d = row_start[r + 1] - b;
      tanh_buf.resize(d);
      prefix.resize(d + 1);
      for (std::size_t j = 0; j < d; ++j) tanh_buf[j] = std::tanh(0.5 * v2c[b + j]);
      prefix[0] = 1.0;
      for (std::size_t j = 0; j < d; ++j) prefix[j + 1] = prefix[j] * tanh_buf[j];
      double suffix = 1.0;
      for (std::size_t j = d; j-- > 0;) {
        const double p = std::clamp(prefix[j] * suffix, -kTanhLimit, kTanhLimit);
        c2v[b + j] = std::clamp(2.0 * std::atanh(p), -kLlrClip, kLlrClip);
        suffix *= tanh_buf[j];
      }
    }

    bool decided = true;
    for (std::size_t v = 0; v < n; ++v) {
      double t = channel[v];
      for (auto e : var_edges[v]) t += c2v[e];
      total[v] = t;
      for (auto e : var_edges[v]) v2c[e] = std::clamp(t - c2v[e], -kLlrClip, kLlrClip);
      res.bits[v] = t < 0.0 ? 1 : 0;
      if (t == 0.0) decided = false;
    }
    res.iterations = it;
    if (decided && code.is_codeword(res.bits)) {
      res.converged = true;
      break;
    }
  }

  res.app.kind = LlrKind::a_posteriori;
  res.app.values.resize(n);
  for (std::size_t v = 0; v < n; ++v) res.app.values[v] = std::clamp(-total[v], -kLlrClip, kLlrClip);
  return res;
}

std::vector<DecodeResult> decode_blocks(std::span<const LlrBlock> blocks, const LdpcCode& code, int max_iter) {
  std::vector<DecodeResult> out(blocks.size());
  detail::FirstError err;
  const auto count = static_cast<std::ptrdiff_t>(blocks.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t b = 0; b < count; ++b)
    err.run([&] { out[b] = decode(blocks[b], code, max_iter); });
  err.rethrow();
  return out;
}

namespace reference {
std::vector<DecodeResult> decode_blocks_serial(std::span<const LlrBlock> blocks, const LdpcCode& code, int max_iter) {
  std::vector<DecodeResult> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(decode(b, code, max_iter));
  return out;
}
}  // namespace reference

}  // namespace wdmturbo
