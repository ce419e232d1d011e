#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace ssvep::fft {

std::size_t next_pow2(std::size_t n);

// Forward real FFT of x zero-padded to nfft. Returns nfft/2+1 bins.
std::vector<std::complex<double>> forward_real(std::span<const double> x, std::size_t nfft);

// Inverse of forward_real without the 1/nfft factor (FFTW convention).
std::vector<double> inverse_real(std::span<const std::complex<double>> half, std::size_t nfft);

}  // namespace ssvep::fft
