#include <stdexcept>
#include <string>

#include "ssvep/fft.hpp"
#include "ssvep/kernels.hpp"
#include "ssvep/sigmodel.hpp"

namespace ssvep::sigmodel {

std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag) {
  const std::size_t n = x.size();
  if (n == 0) throw std::invalid_argument("autocovariance: empty input");
  if (max_lag >= n) {
    throw std::invalid_argument("autocovariance: max_lag " + std::to_string(max_lag) +
                                " must be below the window length " + std::to_string(n));
  }

  std::vector<double> centered(x.begin(), x.end());
  kernels::add_scalar(-kernels::mean(centered), centered);

  // Padding to >= 2N keeps the circular correlation linear.
  const std::size_t nfft = fft::next_pow2(2 * n);
  auto spectrum = fft::forward_real(centered, nfft);

  std::vector<double> power(spectrum.size());
  kernels::active().complex_abs2(reinterpret_cast<const double*>(spectrum.data()), power.data(),
                                 spectrum.size());
  for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] = power[i];

  std::vector<double> r = fft::inverse_real(spectrum, nfft);
  r.resize(max_lag + 1);
  kernels::scale(1.0 / (static_cast<double>(nfft) * static_cast<double>(n)), r);
  return r;
}

std::vector<double> autocovariance(const EegWindow& window, std::size_t max_lag) {
  window.validate();
  return autocovariance(window.view(), max_lag);
}

}  // namespace ssvep::sigmodel
