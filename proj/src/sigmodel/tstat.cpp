#include <algorithm>
#include <stdexcept>
#include <string>

#include "ssvep/errors.hpp"
#include "ssvep/kernels.hpp"
#include "ssvep/sigmodel.hpp"

namespace ssvep::sigmodel {

namespace {

constexpr double kNoiseFloorRel = 1e-12;
// Residual energy below this fraction of the input energy means the window
// is (numerically) a pure basis signal and no AR fit is attempted.
constexpr double kNoiseFreeRel = 1e-20;

}  // namespace

TStatResult t_statistic_detail(const EegWindow& window, double freq, const TStatOptions& options) {
  window.validate();
  const std::size_t n = window.size();
  if (options.ar_order >= n) {
    throw std::invalid_argument("t_statistic: AR order " + std::to_string(options.ar_order) +
                                " must be below the window length " + std::to_string(n));
  }

  std::vector<double> s = window.samples;
  kernels::add_scalar(-kernels::mean(s), s);
  const double r0 = kernels::dot(s, s) / static_cast<double>(n);
  if (!(r0 > 0.0)) throw NumericalError("t_statistic: zero-variance window");

  const HarmonicBasis basis = build_reference_basis(freq, window.fs, n, options.n_harmonics);

  TStatResult result;
  result.power.resize(options.n_harmonics);
  result.raw_power.resize(options.n_harmonics);
  result.noise.resize(options.n_harmonics);
  for (std::size_t k = 1; k <= options.n_harmonics; ++k) {
    const std::size_t cs = 2 * (k - 1);
    const double ps = kernels::dot(basis.column(cs), s);
    const double pc = kernels::dot(basis.column(cs + 1), s);
    result.power[k - 1] = ps * ps + pc * pc;
    result.raw_power[k - 1] = basis.raw_norms[cs] * basis.raw_norms[cs] * ps * ps +
                              basis.raw_norms[cs + 1] * basis.raw_norms[cs + 1] * pc * pc;
  }

  const double floor = kNoiseFloorRel * r0 * static_cast<double>(n);
  const std::vector<double> residual = project_out(s, basis);
  const std::vector<double> r = autocovariance(residual, options.ar_order);

  if (r[0] <= kNoiseFreeRel * r0) {
    std::fill(result.noise.begin(), result.noise.end(), floor);
    result.noise_floor_clamped = true;
  } else {
    const ArModel model = levinson_durbin(r, options.ar_order);
    for (std::size_t k = 1; k <= options.n_harmonics; ++k) {
      const double noise = ar_noise_at_harmonic(model, n, freq, k, window.fs);
      if (noise < floor) result.noise_floor_clamped = true;
      result.noise[k - 1] = std::max(noise, floor);
    }
  }

  double acc = 0.0;
  for (std::size_t k = 0; k < options.n_harmonics; ++k) acc += result.raw_power[k] / result.noise[k];
  result.t = options.calibration * acc / static_cast<double>(options.n_harmonics);
  return result;
}

double t_statistic(const EegWindow& window, double freq, std::size_t n_harmonics,
                   std::size_t ar_order) {
  return t_statistic_detail(window, freq, TStatOptions{n_harmonics, ar_order, 1.0}).t;
}

}  // namespace ssvep::sigmodel
