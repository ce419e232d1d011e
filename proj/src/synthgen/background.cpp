#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "ssvep/fft.hpp"
#include "ssvep/sigmodel.hpp"
#include "ssvep/synthgen.hpp"

namespace ssvep::synthgen {

ArModel ar_from_poles(const std::vector<std::pair<double, double>>& poles, double fs,
                      double innovation_var) {
  if (!(fs > 0.0)) throw std::invalid_argument("ar_from_poles: fs must be positive");
  std::vector<double> poly{1.0};
  auto multiply = [&poly](const std::vector<double>& factor) {
    std::vector<double> out(poly.size() + factor.size() - 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (std::size_t j = 0; j < factor.size(); ++j) out[i + j] += poly[i] * factor[j];
    poly = std::move(out);
  };

  for (const auto& [freq, radius] : poles) {
    if (!(radius >= 0.0 && radius < 1.0)) throw std::invalid_argument("ar_from_poles: radius must be in [0, 1)");
    if (freq < 0.0 || freq > fs / 2.0) throw std::invalid_argument("ar_from_poles: pole frequency outside [0, fs/2]");
    if (freq == 0.0) {
      multiply({1.0, -radius});
    } else if (freq == fs / 2.0) {
      multiply({1.0, radius});
    } else {
      const double theta = 2.0 * std::numbers::pi * freq / fs;
      multiply({1.0, -2.0 * radius * std::cos(theta), radius * radius});
    }
  }

  ArModel model;
  model.coeffs.assign(poly.begin() + 1, poly.end());
  model.innovation_var = innovation_var;
  return model;
}

double ar_process_variance(const ArModel& model) {
  const std::size_t p = model.order();
  if (p == 0) return model.innovation_var;
  std::vector<double> h{1.0};
  double energy = 1.0;
  for (std::size_t t = 1; t < 1'000'000; ++t) {
    double v = 0.0;
    for (std::size_t j = 1; j <= p && j <= t; ++j) v -= model.coeffs[j - 1] * h[t - j];
    h.push_back(v);
    energy += v * v;
    if (!std::isfinite(energy)) throw std::invalid_argument("ar_process_variance: model is not stationary");
    if (t > 10 * p) {
      double recent = 0.0;
      for (std::size_t j = 0; j < p; ++j) recent += std::abs(h[t - j]);
      if (recent < 1e-16) break;
    }
  }
  return model.innovation_var * energy;
}

double ar_spectrum(const ArModel& model, double freq, double fs) {
  const double omega = 2.0 * std::numbers::pi * freq / fs;
  std::complex<double> denom{1.0, 0.0};
  for (std::size_t j = 1; j <= model.order(); ++j) {
    denom += model.coeffs[j - 1] * std::polar(1.0, -omega * static_cast<double>(j));
  }
  return model.innovation_var / std::norm(denom);
}

ArModel eeg_background_model(double fs) {
  if (!(fs > 0.0)) throw std::invalid_argument("eeg_background_model: fs must be positive");
  // Target one-sided shape: 1/f-like decay above ~5 Hz, an alpha bump at
  // 10 Hz and a flat floor. Its exact autocovariance (inverse FFT of the
  // sampled spectrum) is solved for the AR(20) that best matches it. At
  // 512 Hz twenty poles smear the bump into the low-frequency slope.
  constexpr std::size_t kOrder = 20;
  constexpr std::size_t kGrid = 8192;
  std::vector<std::complex<double>> spectrum(kGrid / 2 + 1);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(kGrid);
    const double alpha = (f - 10.0) / 2.0;
    spectrum[k] = std::pow(1.0 + (f / 5.0) * (f / 5.0), -0.7) + 0.6 * std::exp(-0.5 * alpha * alpha) + 0.002;
  }
  std::vector<double> r = fft::inverse_real(spectrum, kGrid);
  r.resize(kOrder + 1);
  const double r0 = r[0];
  for (double& v : r) v /= r0;
  ArModel model = sigmodel::levinson_durbin(r, kOrder);
  model.reflection.clear();
  model.innovation_var /= ar_process_variance(model);
  return model;
}

}  // namespace ssvep::synthgen
