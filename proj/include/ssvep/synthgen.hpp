#pragma once

// Synthetic single-channel EEG with known SSVEP content.
//
// A trial is the sum of harmonic sinusoids at k*f (optional), a stationary
// background process (AR by default, 1/f as a model-mismatch alternative)
// and white measurement noise. Everything is seeded; equal seeds give
// bit-identical output.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ssvep/config.hpp"
#include "ssvep/dataio.hpp"
#include "ssvep/types.hpp"

namespace ssvep::synthgen {

struct SsvepSpec {
  double freq{15.0};
  std::vector<double> harmonic_amps;    // a_1..a_Nh, >= 0
  std::vector<double> harmonic_phases;  // radians in [0, 2 pi)

  void validate() const;
};

enum class Background { Ar, Pink };

struct NoiseSpec {
  Background background{Background::Ar};
  ArModel ar_model;         // used when background == Ar
  double pink_std{0.0};     // used when background == Pink
  double white_std{0.0};

  void validate() const;
};

// Optional acquisition-chain emulation applied after summing the components.
struct AcquisitionOptions {
  bool bandpass{false};  // 2nd-order HP + 2nd-order LP Butterworth, run forward-backward
  double bandpass_low_hz{3.0};
  double bandpass_high_hz{100.0};
  bool quantize{false};
  int quantizer_bits{12};
  double full_scale{1000.0};  // symmetric range [-full_scale, full_scale]
};

EegWindow generate_trial(const std::optional<SsvepSpec>& ssvep, const NoiseSpec& noise,
                         double duration_s, double fs, std::uint64_t seed,
                         const AcquisitionOptions& acquisition = {});

// Stationary AR(20) approximating an EEG-like background (1/f-type decay,
// alpha bump at 10 Hz, flat floor), scaled to unit process variance.
ArModel eeg_background_model(double fs);

// Builds x_t + sum a_j x_{t-j} from complex-conjugate pole pairs
// (frequency in Hz, radius < 1) and real poles (frequency 0).
ArModel ar_from_poles(const std::vector<std::pair<double, double>>& poles, double fs,
                      double innovation_var = 1.0);

// Theoretical process variance of an AR model (impulse-response energy).
double ar_process_variance(const ArModel& model);

// Theoretical two-sided spectrum var / |A(e^{iw})|^2 at freq.
double ar_spectrum(const ArModel& model, double freq, double fs);

struct FrameSchedule {
  double refresh_hz{60.0};
  std::vector<int> pattern;  // 1 = patch visible for that frame
  double effective_freq{0.0};
  double duty{0.0};
  double requested_duty{0.0};
  bool duty_adjusted{false};  // requested duty not realizable in whole frames
};

// Pattern of refresh_hz / target_freq frames with round(duty * len) leading
// on-frames. Throws std::invalid_argument if the period is not an integer
// number of frames (the flicker has to lock to the display refresh).
FrameSchedule frame_schedule(double target_freq, double refresh_hz, double duty);

// SSVEP amplitude levels relative to a unit-variance background.
struct SnrProfile {
  std::string name{"high"};
  std::vector<double> harmonic_amps{1.0, 0.5};
  double background_std{1.0};
  double white_std{0.1};
  Background background{Background::Ar};
};

// Named profiles: "zero", "low", "medium", "high". Throws
// std::invalid_argument for other names.
SnrProfile snr_profile(const std::string& name);
// Fundamental amplitude `amp`, second harmonic at half of it.
SnrProfile snr_profile_with_amplitude(double amp);

// Labeled multi-trial dataset. Trials are interleaved by round (round 0 for
// every frequency, then round 1, ...) so the first trial of each label comes
// first. Per-trial seeds derive from `seed` and are recorded in the manifest.
dataio::Dataset generate_session(const SessionConfig& config, std::size_t per_freq_trials,
                                 double duration_s, const SnrProfile& profile, std::uint64_t seed,
                                 const AcquisitionOptions& acquisition = {});

// splitmix64 step, used to derive independent per-trial seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace ssvep::synthgen
