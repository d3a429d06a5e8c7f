#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace wdmturbo {

using Complex = std::complex<double>;
using CVec = std::vector<Complex>;
using RVec = std::vector<double>;
using Bits = std::vector<std::uint8_t>;

/// Per-polarization pair, index 0 = x, 1 = y.
template <typename T>
using DualPol = std::array<T, 2>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPlanck = 6.62607015e-34;     // J s

/// L-values are clipped to +-kLlrClip everywhere (demapper, decoder messages).
inline constexpr double kLlrClip = 40.0;

inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double lin) { return 10.0 * std::log10(lin); }
inline double dbm_to_watt(double dbm) { return 1e-3 * db_to_lin(dbm); }

}  // namespace wdmturbo
