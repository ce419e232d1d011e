#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssvep/errors.hpp"
#include "ssvep/sigmodel.hpp"

namespace ssvep::sigmodel {

ArModel levinson_durbin(std::span<const double> autocov, std::size_t order) {
  if (autocov.size() < order + 1) {
    throw std::invalid_argument("levinson_durbin: need r(0).." + std::to_string(order) +
                                ", got " + std::to_string(autocov.size()) + " lags");
  }
  const double r0 = autocov[0];
  if (!(r0 > 0.0) || !std::isfinite(r0)) {
    throw std::invalid_argument("levinson_durbin: r(0) must be positive");
  }

  // recursion runs in extended precision: high-order fits on peaky spectra
  // are badly conditioned and lose digits fast in double
  using real = long double;
  std::vector<real> a, prev;
  a.reserve(order);
  ArModel model;
  model.reflection.reserve(order);
  real err = r0;

  for (std::size_t m = 1; m <= order; ++m) {
    real acc = autocov[m];
    for (std::size_t j = 1; j < m; ++j) acc += a[j - 1] * autocov[m - j];
    const real k = -acc / err;
    if (!(std::abs(k) < 1.0L)) {
      throw NumericalError("levinson_durbin: reflection coefficient |k| >= 1 at order " +
                           std::to_string(m) + "; autocovariance is ill-conditioned");
    }

    prev = a;
    a.push_back(k);
    for (std::size_t j = 1; j < m; ++j) a[j - 1] = prev[j - 1] + k * prev[m - j - 1];
    model.reflection.push_back(static_cast<double>(k));

    err *= (1.0L - k * k);
    if (!(err > 0.0L)) {
      throw NumericalError("levinson_durbin: prediction error vanished at order " +
                           std::to_string(m) + "; autocovariance is ill-conditioned");
    }
  }
  model.coeffs.assign(a.begin(), a.end());
  model.innovation_var = static_cast<double>(err);
  return model;
}

double ar_noise_at_harmonic(const ArModel& model, std::size_t n_samples, double freq,
                            std::size_t harmonic, double fs) {
  if (harmonic < 1) throw std::invalid_argument("ar_noise_at_harmonic: harmonic must be >= 1");
  if (!(fs > 0.0)) throw std::invalid_argument("ar_noise_at_harmonic: fs must be positive");
  const double hf = static_cast<double>(harmonic) * freq;
  if (!(hf < fs / 2.0) || !(freq > 0.0)) {
    throw std::invalid_argument("ar_noise_at_harmonic: k*f must lie in (0, fs/2)");
  }
  if (model.innovation_var < 0.0) {
    throw std::invalid_argument("ar_noise_at_harmonic: negative innovation variance");
  }

  const double omega = 2.0 * std::numbers::pi * hf / fs;
  std::complex<double> denom{1.0, 0.0};
  for (std::size_t j = 1; j <= model.coeffs.size(); ++j) {
    denom += model.coeffs[j - 1] * std::polar(1.0, -omega * static_cast<double>(j));
  }
  return std::numbers::pi * static_cast<double>(n_samples) / 4.0 * model.innovation_var /
         std::norm(denom);
}

}  // namespace ssvep::sigmodel
