#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace mmfmd::detail {

// Unnormalized 2D DFT of a square row-major array (FFTW, estimate plans).
// Forward uses exp(-j 2 pi k n / N).
void fft2d(std::vector<std::complex<double>>& data, std::size_t side, bool inverse);

// Signed frequency of bin k in cycles per sample.
inline double bin_frequency(std::size_t k, std::size_t side) {
  const auto n = static_cast<double>(side);
  const auto kk = static_cast<double>(k);
  return 2 * k < side ? kk / n : (kk - n) / n;
}

}  // namespace mmfmd::detail
