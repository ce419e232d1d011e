#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ssvep {

// A fixed-rate single-channel signal segment.
//
// Invariants (checked by validate()): at least 2 samples, fs > 0, all samples
// finite. Units are whatever the acquisition produced (microvolts for EEG).
struct EegWindow {
  std::vector<double> samples;
  double fs{0.0};
  double t0{0.0};  // start offset in seconds

  EegWindow() = default;
  EegWindow(std::vector<double> s, double fs_hz, double t0_s = 0.0)
      : samples(std::move(s)), fs(fs_hz), t0(t0_s) {}

  std::size_t size() const { return samples.size(); }
  double duration_s() const { return static_cast<double>(samples.size()) / fs; }
  std::span<const double> view() const { return samples; }

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

// AR(p) model in the convention x_t + sum_j coeffs[j-1] * x_{t-j} = e_t,
// with e_t white of variance innovation_var.
struct ArModel {
  std::vector<double> coeffs;
  double innovation_var{0.0};
  // Reflection coefficients produced by Levinson-Durbin (empty when the
  // model was specified by hand).
  std::vector<double> reflection;

  std::size_t order() const { return coeffs.size(); }
};

struct Psd {
  std::vector<double> freqs;  // Hz, strictly increasing, 0..fs/2
  std::vector<double> power;  // >= 0
};

}  // namespace ssvep
