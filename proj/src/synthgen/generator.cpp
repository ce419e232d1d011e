#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "ssvep/fft.hpp"
#include "ssvep/synthgen.hpp"

namespace ssvep::synthgen {

namespace {

// RBJ biquad, direct form I.
struct Biquad {
  double b0, b1, b2, a1, a2;

  void run(std::vector<double>& x) const {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (double& v : x) {
      const double y = b0 * v + b1 * x1 + b2 * x2 - a1 * y1 - a2 * y2;
      x2 = x1;
      x1 = v;
      y2 = y1;
      y1 = y;
      v = y;
    }
  }
};

Biquad butterworth2(double cutoff, double fs, bool highpass) {
  const double w0 = 2.0 * std::numbers::pi * cutoff / fs;
  // Q = 1/sqrt(2)
  const double alpha = std::sin(w0) / std::numbers::sqrt2;
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  if (highpass) {
    return {(1.0 + cw) / 2.0 / a0, -(1.0 + cw) / a0, (1.0 + cw) / 2.0 / a0, -2.0 * cw / a0,
            (1.0 - alpha) / a0};
  }
  return {(1.0 - cw) / 2.0 / a0, (1.0 - cw) / a0, (1.0 - cw) / 2.0 / a0, -2.0 * cw / a0,
          (1.0 - alpha) / a0};
}

// Forward-backward pass with odd reflection padding to tame edge transients.
void filtfilt(const std::vector<Biquad>& stages, std::vector<double>& x, std::size_t pad) {
  const std::size_t n = x.size();
  pad = std::min(pad, n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  for (const auto& s : stages) s.run(ext);
  std::reverse(ext.begin(), ext.end());
  for (const auto& s : stages) s.run(ext);
  std::reverse(ext.begin(), ext.end());
  std::copy(ext.begin() + static_cast<std::ptrdiff_t>(pad),
            ext.begin() + static_cast<std::ptrdiff_t>(pad + n), x.begin());
}

std::vector<double> ar_noise(const ArModel& model, std::size_t n, std::mt19937_64& rng) {
  const std::size_t p = model.order();
  const std::size_t burn = 10 * p + 200;
  std::normal_distribution<double> innov(0.0, std::sqrt(model.innovation_var));
  std::vector<double> x(n + burn, 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    double v = innov(rng);
    for (std::size_t j = 1; j <= p && j <= t; ++j) v -= model.coeffs[j - 1] * x[t - j];
    x[t] = v;
  }
  return std::vector<double>(x.begin() + static_cast<std::ptrdiff_t>(burn), x.end());
}

std::vector<double> pink_noise(double std_dev, std::size_t n, std::mt19937_64& rng) {
  const std::size_t nfft = fft::next_pow2(std::max<std::size_t>(n, 2));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> white(nfft);
  for (double& v : white) v = gauss(rng);
  auto spectrum = fft::forward_real(white, nfft);
  spectrum[0] = 0.0;
  for (std::size_t k = 1; k < spectrum.size(); ++k) spectrum[k] /= std::sqrt(static_cast<double>(k));
  std::vector<double> x = fft::inverse_real(spectrum, nfft);
  x.resize(n);
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double& v : x) {
    v -= mean;
    var += v * v;
  }
  var /= static_cast<double>(n);
  const double gain = var > 0.0 ? std_dev / std::sqrt(var) : 0.0;
  for (double& v : x) v *= gain;
  return x;
}

}  // namespace

void SsvepSpec::validate() const {
  if (!(freq > 0.0)) throw std::invalid_argument("SsvepSpec: freq must be positive");
  if (harmonic_amps.empty()) throw std::invalid_argument("SsvepSpec: no harmonic amplitudes");
  if (harmonic_phases.size() != harmonic_amps.size()) {
    throw std::invalid_argument("SsvepSpec: amplitudes and phases differ in length");
  }
  for (double a : harmonic_amps) {
    if (!(a >= 0.0)) throw std::invalid_argument("SsvepSpec: amplitudes must be >= 0");
  }
  for (double ph : harmonic_phases) {
    if (!(ph >= 0.0 && ph < 2.0 * std::numbers::pi)) {
      throw std::invalid_argument("SsvepSpec: phases must lie in [0, 2 pi)");
    }
  }
}

void NoiseSpec::validate() const {
  if (!(white_std >= 0.0)) throw std::invalid_argument("NoiseSpec: white_std must be >= 0");
  if (background == Background::Pink && !(pink_std >= 0.0)) {
    throw std::invalid_argument("NoiseSpec: pink_std must be >= 0");
  }
  if (background == Background::Ar) {
    if (!(ar_model.innovation_var >= 0.0)) throw std::invalid_argument("NoiseSpec: negative innovation variance");
    // Throws for explosive models.
    (void)ar_process_variance(ar_model);
  }
}

EegWindow generate_trial(const std::optional<SsvepSpec>& ssvep, const NoiseSpec& noise,
                         double duration_s, double fs, std::uint64_t seed,
                         const AcquisitionOptions& acquisition) {
  if (!(fs > 0.0)) throw std::invalid_argument("generate_trial: fs must be positive");
  if (!(duration_s > 0.0) || !(duration_s * fs >= 2.0)) {
    throw std::invalid_argument("generate_trial: duration_s * fs must be >= 2");
  }
  noise.validate();
  const auto n = static_cast<std::size_t>(std::llround(duration_s * fs));
  std::vector<double> x(n, 0.0);

  if (ssvep) {
    ssvep->validate();
    for (std::size_t k = 1; k <= ssvep->harmonic_amps.size(); ++k) {
      const double a = ssvep->harmonic_amps[k - 1];
      if (a == 0.0) continue;
      if (!(static_cast<double>(k) * ssvep->freq < fs / 2.0)) {
        throw std::invalid_argument("generate_trial: harmonic " + std::to_string(k) + " above Nyquist");
      }
      const double omega = 2.0 * std::numbers::pi * static_cast<double>(k) * ssvep->freq / fs;
      const double phase = ssvep->harmonic_phases[k - 1];
      for (std::size_t t = 0; t < n; ++t) x[t] += a * std::sin(omega * static_cast<double>(t) + phase);
    }
  }

  if (noise.background == Background::Ar && noise.ar_model.innovation_var > 0.0) {
    std::mt19937_64 rng(derive_seed(seed, 1));
    const auto bg = ar_noise(noise.ar_model, n, rng);
    for (std::size_t t = 0; t < n; ++t) x[t] += bg[t];
  } else if (noise.background == Background::Pink && noise.pink_std > 0.0) {
    std::mt19937_64 rng(derive_seed(seed, 3));
    const auto bg = pink_noise(noise.pink_std, n, rng);
    for (std::size_t t = 0; t < n; ++t) x[t] += bg[t];
  }

  if (noise.white_std > 0.0) {
    std::mt19937_64 rng(derive_seed(seed, 2));
    std::normal_distribution<double> gauss(0.0, noise.white_std);
    for (double& v : x) v += gauss(rng);
  }

  if (acquisition.bandpass) {
    std::vector<Biquad> stages{butterworth2(acquisition.bandpass_low_hz, fs, true)};
    if (acquisition.bandpass_high_hz < fs / 2.0) {
      stages.push_back(butterworth2(acquisition.bandpass_high_hz, fs, false));
    }
    filtfilt(stages, x, static_cast<std::size_t>(fs));
  }

  if (acquisition.quantize) {
    if (acquisition.quantizer_bits < 2 || acquisition.quantizer_bits > 32 || !(acquisition.full_scale > 0.0)) {
      throw std::invalid_argument("generate_trial: invalid quantizer settings");
    }
    const double levels = std::ldexp(1.0, acquisition.quantizer_bits);
    const double step = 2.0 * acquisition.full_scale / levels;
    const double lo = -levels / 2.0;
    const double hi = levels / 2.0 - 1.0;
    for (double& v : x) v = std::clamp(std::round(v / step), lo, hi) * step;
  }

  return EegWindow(std::move(x), fs, 0.0);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace ssvep::synthgen
