#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

namespace ssvep {

// Segment length and stride. hop == length gives non-overlapping windows.
struct WindowPolicy {
  double length_s{2.0};
  double hop_s{2.0};
  bool drop_partial{true};

  // Throws std::invalid_argument unless length_s > 0 and 0 < hop_s <= length_s.
  void validate() const;
};

// Defaults reproduce the two-target offline protocol: 512 Hz sampling,
// probes at 12 and 15 Hz with two harmonics each, 1 s and 2 s
// non-overlapping windows, 60 Hz stimulus refresh.
struct SessionConfig {
  double fs{512.0};
  std::vector<double> probe_freqs{12.0, 15.0};
  std::size_t n_harmonics{2};
  std::size_t ar_order{20};
  std::vector<WindowPolicy> window_policies{{1.0, 1.0, true}, {2.0, 2.0, true}};
  // Live sliding analysis used by the streaming daemon.
  WindowPolicy stream_policy{2.0, 0.5, true};
  double refresh_hz{60.0};
  std::map<double, double> duties{{12.0, 0.40}, {15.0, 0.50}};
  std::size_t smoother_depth{3};
  double calibration{1.0};

  // Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  double duty_for(double freq) const;
};

void to_json(nlohmann::json& j, const WindowPolicy& p);
void from_json(const nlohmann::json& j, WindowPolicy& p);
void to_json(nlohmann::json& j, const SessionConfig& c);
// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, SessionConfig& c);

SessionConfig load_config(const std::filesystem::path& path);

}  // namespace ssvep
