#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "wdmturbo/constellation.hpp"
#include "wdmturbo/types.hpp"

namespace wdmturbo {

/// Binary LDPC code defined by a sparse parity-check matrix.
///
/// Text format: a header line "n m", then m lines, each the space-separated
/// 0-based column indices of one row. write() reproduces a canonical file
/// byte for byte.
class LdpcCode {
 public:
  LdpcCode() = default;
  LdpcCode(std::size_t n, std::vector<std::vector<std::uint32_t>> rows);

  static LdpcCode parse(std::istream& in);
  static LdpcCode load(const std::filesystem::path& path);
  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  std::size_t n() const { return n_; }
  std::size_t m() const { return rows_.size(); }
  /// Dimension n - rank(H).
  std::size_t k() const { return info_positions_.size(); }
  double rate() const { return static_cast<double>(k()) / static_cast<double>(n_); }

  const std::vector<std::vector<std::uint32_t>>& rows() const { return rows_; }
  const std::vector<std::vector<std::uint32_t>>& columns() const { return cols_; }

  /// Codeword positions carrying the information bits, in info order.
  std::span<const std::uint32_t> info_positions() const { return info_positions_; }

  /// Systematic encoding: info bits are copied to info_positions(), the
  /// remaining positions are solved from H c^T = 0.
  Bits encode(std::span<const std::uint8_t> info) const;
  Bits extract_info(std::span<const std::uint8_t> codeword) const;
  std::size_t unsatisfied_checks(std::span<const std::uint8_t> word) const;
  bool is_codeword(std::span<const std::uint8_t> word) const { return unsatisfied_checks(word) == 0; }

 private:
  void build_encoder();

  std::size_t n_ = 0;
  std::vector<std::vector<std::uint32_t>> rows_;
  std::vector<std::vector<std::uint32_t>> cols_;
  std::vector<std::uint32_t> info_positions_;
  std::vector<std::uint32_t> parity_positions_;
  // Reduced row r: parity_positions_[r] = XOR of info bits selected by
  // parity_rows_[r] (bit-packed over info index).
  std::vector<std::vector<std::uint64_t>> parity_rows_;
};

/// Bijection on {0..n-1}; interleave(x)[i] = x[perm[i]].
class Interleaver {
 public:
  /// Fisher-Yates shuffle driven by mt19937_64(seed).
  Interleaver(std::size_t n, std::uint64_t seed);
  explicit Interleaver(std::vector<std::uint32_t> permutation);
  static Interleaver identity(std::size_t n);

  std::size_t size() const { return perm_.size(); }
  std::uint64_t seed() const { return seed_; }
  std::span<const std::uint32_t> permutation() const { return perm_; }

  template <typename T>
  std::vector<T> interleave(std::span<const T> in) const {
    check(in.size());
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[perm_[i]];
    return out;
  }
  template <typename T>
  std::vector<T> deinterleave(std::span<const T> in) const {
    check(in.size());
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[perm_[i]] = in[i];
    return out;
  }

 private:
  void check(std::size_t len) const;
  std::vector<std::uint32_t> perm_;
  std::uint64_t seed_ = 0;
};

struct DecodeResult {
  LlrBlock app;  // a posteriori, kind = a_posteriori
  Bits bits;     // hard decisions, 1 where app > 0
  bool converged = false;
  int iterations = 0;
};

/// Flooding sum-product decoding. Stops at the first iteration whose hard
/// decisions satisfy every check; a zero a posteriori value counts as
/// undecided and prevents convergence. Messages are clipped to +-kLlrClip.
DecodeResult decode(const LlrBlock& llrs, const LdpcCode& code, int max_iter);

/// Decodes independent blocks concurrently.
std::vector<DecodeResult> decode_blocks(std::span<const LlrBlock> blocks, const LdpcCode& code, int max_iter);

namespace reference {
std::vector<DecodeResult> decode_blocks_serial(std::span<const LlrBlock> blocks, const LdpcCode& code,
                                               int max_iter);
}  // namespace reference

}  // namespace wdmturbo
