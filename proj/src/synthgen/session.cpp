#include <cmath>
#include <cstdio>
#include <algorithm>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "ssvep/synthgen.hpp"

namespace ssvep::synthgen {

FrameSchedule frame_schedule(double target_freq, double refresh_hz, double duty) {
  if (!(target_freq > 0.0) || !(refresh_hz > 0.0)) {
    throw std::invalid_argument("frame_schedule: frequencies must be positive");
  }
  if (!(duty > 0.0 && duty < 1.0)) throw std::invalid_argument("frame_schedule: duty must be in (0, 1)");
  const double frames = refresh_hz / target_freq;
  const double whole = std::round(frames);
  if (std::abs(frames - whole) > 1e-9) {
    throw std::invalid_argument("frame_schedule: " + std::to_string(target_freq) + " Hz needs " +
                                std::to_string(frames) + " frames per period at " +
                                std::to_string(refresh_hz) +
                                " Hz; the flicker must be locked to the vertical refresh, so the "
                                "period has to be a whole number of frames");
  }
  const auto len = static_cast<std::size_t>(whole);
  if (len < 2) throw std::invalid_argument("frame_schedule: period shorter than two frames");

  auto on = static_cast<std::size_t>(std::llround(duty * static_cast<double>(len)));
  on = std::clamp<std::size_t>(on, 1, len - 1);

  FrameSchedule s;
  s.refresh_hz = refresh_hz;
  s.pattern.assign(len, 0);
  std::fill(s.pattern.begin(), s.pattern.begin() + static_cast<std::ptrdiff_t>(on), 1);
  s.effective_freq = refresh_hz / static_cast<double>(len);
  s.duty = static_cast<double>(on) / static_cast<double>(len);
  s.requested_duty = duty;
  s.duty_adjusted = std::abs(s.duty - duty) > 1e-9;
  return s;
}

SnrProfile snr_profile(const std::string& name) {
  if (name == "zero") return {"zero", {0.0, 0.0}, 1.0, 0.1, Background::Ar};
  if (name == "low") return {"low", {0.4, 0.2}, 1.0, 0.1, Background::Ar};
  if (name == "medium") return {"medium", {0.6, 0.3}, 1.0, 0.1, Background::Ar};
  if (name == "high") return {"high", {1.0, 0.5}, 1.0, 0.1, Background::Ar};
  throw std::invalid_argument("unknown SNR profile '" + name + "' (zero|low|medium|high)");
}

SnrProfile snr_profile_with_amplitude(double amp) {
  if (!(amp >= 0.0)) throw std::invalid_argument("SNR amplitude must be >= 0");
  char name[48];
  std::snprintf(name, sizeof(name), "amp=%g", amp);
  return {name, {amp, amp / 2.0}, 1.0, 0.1, Background::Ar};
}

dataio::Dataset generate_session(const SessionConfig& config, std::size_t per_freq_trials,
                                 double duration_s, const SnrProfile& profile, std::uint64_t seed,
                                 const AcquisitionOptions& acquisition) {
  config.validate();
  if (per_freq_trials < 1) throw std::invalid_argument("generate_session: need at least one trial per frequency");
  if (!(duration_s > 0.0)) throw std::invalid_argument("generate_session: duration_s must be positive");
  if (!(profile.background_std >= 0.0) || !(profile.white_std >= 0.0)) {
    throw std::invalid_argument("generate_session: invalid SNR profile");
  }

  NoiseSpec noise;
  noise.background = profile.background;
  noise.white_std = profile.white_std;
  if (profile.background == Background::Ar) {
    noise.ar_model = eeg_background_model(config.fs);
    noise.ar_model.innovation_var *= profile.background_std * profile.background_std;
  } else {
    noise.pink_std = profile.background_std;
  }

  bool any_ssvep = false;
  for (double a : profile.harmonic_amps) any_ssvep = any_ssvep || a > 0.0;

  dataio::Dataset dataset;
  dataset.fs = config.fs;
  dataset.probe_freqs = config.probe_freqs;
  dataset.extras["generator"] = {
      {"profile", profile.name},
      {"harmonic_amps", profile.harmonic_amps},
      {"background", profile.background == Background::Ar ? "ar" : "pink"},
      {"background_std", profile.background_std},
      {"white_std", profile.white_std},
      {"per_freq_trials", per_freq_trials},
      {"seed", seed},
  };

  std::size_t index = 0;
  for (std::size_t round = 0; round < per_freq_trials; ++round) {
    for (double freq : config.probe_freqs) {
      const std::uint64_t trial_seed = derive_seed(seed, index);
      std::optional<SsvepSpec> spec;
      if (any_ssvep) {
        std::mt19937_64 rng(derive_seed(trial_seed, 100));
        std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
        SsvepSpec s;
        s.freq = freq;
        for (double a : profile.harmonic_amps) {
          s.harmonic_amps.push_back(a);
          double ph = phase(rng);
          if (ph >= 2.0 * std::numbers::pi) ph = 0.0;
          s.harmonic_phases.push_back(ph);
        }
        spec = std::move(s);
      }

      dataio::Trial trial;
      char id[32];
      std::snprintf(id, sizeof(id), "t%02zu", index);
      trial.entry.trial_id = id;
      trial.entry.freq = freq;
      trial.entry.file = std::string(id) + ".csv";
      trial.entry.duration_s = duration_s;
      trial.entry.seed = trial_seed;
      trial.entry.extras["round"] = round;
      trial.signal = generate_trial(spec, noise, duration_s, config.fs, trial_seed, acquisition);
      dataset.trials.push_back(std::move(trial));
      ++index;
    }
  }
  return dataset;
}

}  // namespace ssvep::synthgen
