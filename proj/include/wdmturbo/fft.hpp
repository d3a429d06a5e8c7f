#pragma once

#include <span>

#include "wdmturbo/types.hpp"

namespace wdmturbo {

// Thin wrapper over FFTW. Plans are cached per (length, direction) and
// created with FFTW_ESTIMATE | FFTW_UNALIGNED, so results do not depend on
// buffer alignment or on which thread first requested the plan.

/// In-place forward DFT, unnormalized.
void fft(std::span<Complex> data);
/// In-place inverse DFT, scaled by 1/N.
void ifft(std::span<Complex> data);

/// FFT bin frequencies in Hz (numpy.fft.fftfreq ordering).
RVec fft_frequencies(std::size_t n, double sample_rate);

}  // namespace wdmturbo
