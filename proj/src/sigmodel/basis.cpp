#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ssvep/errors.hpp"
#include "ssvep/kernels.hpp"
#include "ssvep/sigmodel.hpp"

namespace ssvep {

void EegWindow::validate() const {
  if (samples.size() < 2) throw std::invalid_argument("EegWindow: need at least 2 samples");
  if (!(fs > 0.0) || !std::isfinite(fs)) throw std::invalid_argument("EegWindow: fs must be positive");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i])) {
      throw std::invalid_argument("EegWindow: non-finite sample at index " + std::to_string(i));
    }
  }
}

}  // namespace ssvep

namespace ssvep::sigmodel {

HarmonicBasis build_reference_basis(double freq, double fs, std::size_t n_samples,
                                    std::size_t n_harmonics) {
  if (n_harmonics == 0) throw std::invalid_argument("reference basis: n_harmonics must be >= 1");
  if (n_samples < 2) throw std::invalid_argument("reference basis: degenerate window length");
  if (!(fs > 0.0)) throw std::invalid_argument("reference basis: fs must be positive");
  if (!(freq > 0.0)) throw std::invalid_argument("reference basis: freq must be positive");
  if (!(static_cast<double>(n_harmonics) * freq < fs / 2.0)) {
    throw std::invalid_argument("reference basis: harmonic " + std::to_string(n_harmonics) + " of " +
                                std::to_string(freq) + " Hz is not below Nyquist (" +
                                std::to_string(fs / 2.0) + " Hz)");
  }

  HarmonicBasis basis;
  basis.freq = freq;
  basis.fs = fs;
  basis.n_harmonics = n_harmonics;
  basis.n_samples = n_samples;
  basis.data.resize(2 * n_harmonics * n_samples);
  basis.raw_norms.resize(2 * n_harmonics);

  for (std::size_t k = 1; k <= n_harmonics; ++k) {
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(k) * freq / fs;
    double* sin_col = basis.data.data() + (2 * (k - 1)) * n_samples;
    double* cos_col = sin_col + n_samples;
    for (std::size_t n = 0; n < n_samples; ++n) {
      const double phase = omega * static_cast<double>(n);
      sin_col[n] = std::sin(phase);
      cos_col[n] = std::cos(phase);
    }
    for (std::size_t c = 2 * (k - 1); c < 2 * k; ++c) {
      double* col = basis.data.data() + c * n_samples;
      const double norm = std::sqrt(kernels::active().dot(col, col, n_samples));
      if (!(norm > 0.0)) throw NumericalError("reference basis: zero column");
      basis.raw_norms[c] = norm;
      kernels::active().scale(1.0 / norm, col, n_samples);
    }
  }
  return basis;
}

}  // namespace ssvep::sigmodel
