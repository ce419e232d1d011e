#pragma once

// Single-channel SSVEP signal model.
//
// A window s is modeled as harmonic sinusoids at k*f (k = 1..N_h) plus
// stimulus-unrelated background activity plus measurement noise. Detection
// uses the noise-normalized statistic
//
//   T = (1/N_h) * sum_k P_k / sigma_k^2
//
// where P_k is the energy of s captured by the sin/cos pair of harmonic k,
// and sigma_k^2 is the background level at k*f interpolated from an AR(p)
// model fitted to s with the harmonic subspace projected out. Noise is
// estimated on the same segment, so no stimulus-free calibration recording
// is needed.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ssvep/types.hpp"

namespace ssvep::sigmodel {

// N_t x 2*N_h reference matrix, stored column-major. Columns 2(k-1) and
// 2(k-1)+1 hold sin(2 pi k f n/fs) and cos(2 pi k f n/fs) scaled to unit
// Euclidean norm.
struct HarmonicBasis {
  double freq{0.0};
  double fs{0.0};
  std::size_t n_harmonics{0};
  std::size_t n_samples{0};
  std::vector<double> data;
  // Euclidean norm of each column before normalization. Lets callers recover
  // projections onto the raw sinusoids.
  std::vector<double> raw_norms;

  std::size_t n_columns() const { return 2 * n_harmonics; }
  std::span<const double> column(std::size_t c) const {
    return std::span<const double>(data).subspan(c * n_samples, n_samples);
  }
};

// Throws std::invalid_argument when n_harmonics == 0, n_samples < 2, freq <= 0
// or n_harmonics * freq >= fs / 2.
HarmonicBasis build_reference_basis(double freq, double fs, std::size_t n_samples,
                                    std::size_t n_harmonics);

// s - X (X^T X)^{-1} X^T s. Throws NumericalError if X^T X is rank deficient
// (never regularized) and std::invalid_argument on a length mismatch.
std::vector<double> project_out(std::span<const double> s, const HarmonicBasis& basis);
EegWindow project_out_ssvep(const EegWindow& window, const HarmonicBasis& basis);

// ||x_k^T s||^2 over the two unit columns of harmonic k (1-based).
double ssvep_power(std::span<const double> s, const HarmonicBasis& basis, std::size_t harmonic);
double ssvep_power(const EegWindow& window, const HarmonicBasis& basis, std::size_t harmonic);

// Biased autocovariance r(0..max_lag) of the mean-removed signal, computed
// with a zero-padded FFT (length: next power of two >= 2N) and divided by N.
// Throws std::invalid_argument unless max_lag < N.
std::vector<double> autocovariance(std::span<const double> x, std::size_t max_lag);
std::vector<double> autocovariance(const EegWindow& window, std::size_t max_lag);

// Solves the Yule-Walker system for AR(order). Throws std::invalid_argument
// if autocov has fewer than order+1 entries or r(0) <= 0, NumericalError if
// the prediction error becomes non-positive.
ArModel levinson_durbin(std::span<const double> autocov, std::size_t order);

// (pi N_t / 4) * var / |1 + sum_j a_j exp(-2 pi i j k f / fs)|^2
double ar_noise_at_harmonic(const ArModel& model, std::size_t n_samples, double freq,
                            std::size_t harmonic, double fs);

struct TStatOptions {
  std::size_t n_harmonics{2};
  std::size_t ar_order{20};
  // Global multiplier on T. The null mean is about 4/pi with the default.
  double calibration{1.0};
};

struct TStatResult {
  double t{0.0};
  std::vector<double> power;      // P_k against unit-norm columns
  std::vector<double> raw_power;  // P_k against the raw sinusoid columns
  std::vector<double> noise;      // sigma_k^2 after flooring
  bool noise_floor_clamped{false};
};

// Builds the basis, removes the mean, measures harmonic power, fits AR(p) to
// the residual and returns the averaged SNR. sigma_k^2 is floored at
// 1e-12 * r(0) * N_t (r(0) of the mean-removed input); flooring is reported
// in the result. Throws NumericalError on a zero-variance window.
TStatResult t_statistic_detail(const EegWindow& window, double freq, const TStatOptions& options);
double t_statistic(const EegWindow& window, double freq, std::size_t n_harmonics = 2,
                   std::size_t ar_order = 20);

// FFT of the symmetric biased autocovariance sequence, one-sided grid
// 0..fs/2. With max_lag set, lags beyond it are dropped and a Bartlett lag
// window is applied (Blackman-Tukey); otherwise the full sequence is used.
// Requires at least 64 samples (DataError).
Psd psd_via_autocorrelation(const EegWindow& window, std::optional<std::size_t> max_lag = {});

}  // namespace ssvep::sigmodel
