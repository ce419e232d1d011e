#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ssvep/fft.hpp"
#include "ssvep/errors.hpp"
#include "ssvep/sigmodel.hpp"

namespace ssvep::sigmodel {

Psd psd_via_autocorrelation(const EegWindow& window, std::optional<std::size_t> max_lag) {
  window.validate();
  const std::size_t n = window.size();
  if (n < 64) {
    throw DataError("psd: need at least 64 samples, got " + std::to_string(n));
  }

  const std::size_t lags = max_lag ? std::min(*max_lag, n - 1) : n - 1;
  const std::vector<double> r = autocovariance(window.view(), lags);

  // Symmetric sequence r(-L..L) laid out circularly.
  const std::size_t nfft = fft::next_pow2(2 * n);
  std::vector<double> seq(nfft, 0.0);
  for (std::size_t tau = 0; tau <= lags; ++tau) {
    const double w = max_lag ? 1.0 - static_cast<double>(tau) / static_cast<double>(lags + 1) : 1.0;
    seq[tau] = r[tau] * w;
    if (tau > 0) seq[nfft - tau] = r[tau] * w;
  }
  const auto spectrum = fft::forward_real(seq, nfft);

  Psd psd;
  psd.freqs.resize(spectrum.size());
  psd.power.resize(spectrum.size());
  double peak = 0.0;
  for (const auto& c : spectrum) peak = std::max(peak, std::abs(c.real()));
  const double clip = 1e-9 * std::max(1.0, peak);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    psd.freqs[k] = static_cast<double>(k) * window.fs / static_cast<double>(nfft);
    const double p = spectrum[k].real();
    if (p < -clip) {
      throw NumericalError("psd: negative power " + std::to_string(p) + " at bin " +
                           std::to_string(k));
    }
    psd.power[k] = std::max(p, 0.0);
  }
  return psd;
}

}  // namespace ssvep::sigmodel
