#include "ssvep/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "ssvep/errors.hpp"

namespace ssvep {

void WindowPolicy::validate() const {
  if (!(length_s > 0.0)) throw std::invalid_argument("window policy: length_s must be > 0");
  if (!(hop_s > 0.0) || hop_s > length_s) {
    throw std::invalid_argument("window policy: hop_s must satisfy 0 < hop_s <= length_s");
  }
}

void SessionConfig::validate() const {
  if (!(fs > 0.0)) throw std::invalid_argument("config: fs must be positive");
  if (probe_freqs.empty()) throw std::invalid_argument("config: probe_freqs must not be empty");
  if (n_harmonics < 1) throw std::invalid_argument("config: n_harmonics must be >= 1");
  if (ar_order < 1 || ar_order > 64) throw std::invalid_argument("config: ar_order must be in 1..64");
  for (double f : probe_freqs) {
    if (!(f > 0.0) || !(static_cast<double>(n_harmonics) * f < fs / 2.0)) {
      throw std::invalid_argument("config: probe " + std::to_string(f) +
                                  " Hz has harmonics at or above Nyquist");
    }
  }
  for (const auto& p : window_policies) p.validate();
  stream_policy.validate();
  if (!(refresh_hz > 0.0)) throw std::invalid_argument("config: refresh_hz must be positive");
  for (const auto& [f, d] : duties) {
    if (!(d > 0.0 && d < 1.0)) {
      throw std::invalid_argument("config: duty for " + std::to_string(f) + " Hz must be in (0, 1)");
    }
  }
  if (smoother_depth < 1) throw std::invalid_argument("config: smoother_depth must be >= 1");
  if (!(calibration > 0.0)) throw std::invalid_argument("config: calibration must be positive");
}

double SessionConfig::duty_for(double freq) const {
  for (const auto& [f, d] : duties) {
    if (std::abs(f - freq) < 1e-9) return d;
  }
  return 0.5;
}

void to_json(nlohmann::json& j, const WindowPolicy& p) {
  j = nlohmann::json{{"length_s", p.length_s}, {"hop_s", p.hop_s}, {"drop_partial", p.drop_partial}};
}

void from_json(const nlohmann::json& j, WindowPolicy& p) {
  p.length_s = j.at("length_s").get<double>();
  p.hop_s = j.value("hop_s", p.length_s);
  p.drop_partial = j.value("drop_partial", true);
}

void to_json(nlohmann::json& j, const SessionConfig& c) {
  nlohmann::json duties = nlohmann::json::array();
  for (const auto& [f, d] : c.duties) duties.push_back({{"freq", f}, {"duty", d}});
  j = nlohmann::json{{"fs", c.fs},
                     {"probe_freqs", c.probe_freqs},
                     {"n_harmonics", c.n_harmonics},
                     {"ar_order", c.ar_order},
                     {"window_policies", c.window_policies},
                     {"stream_policy", c.stream_policy},
                     {"refresh_hz", c.refresh_hz},
                     {"duties", duties},
                     {"smoother_depth", c.smoother_depth},
                     {"calibration", c.calibration}};
}

void from_json(const nlohmann::json& j, SessionConfig& c) {
  c.fs = j.value("fs", c.fs);
  c.probe_freqs = j.value("probe_freqs", c.probe_freqs);
  c.n_harmonics = j.value("n_harmonics", c.n_harmonics);
  c.ar_order = j.value("ar_order", c.ar_order);
  if (j.contains("window_policies")) c.window_policies = j.at("window_policies").get<std::vector<WindowPolicy>>();
  if (j.contains("stream_policy")) c.stream_policy = j.at("stream_policy").get<WindowPolicy>();
  c.refresh_hz = j.value("refresh_hz", c.refresh_hz);
  if (j.contains("duties")) {
    c.duties.clear();
    for (const auto& d : j.at("duties")) c.duties[d.at("freq").get<double>()] = d.at("duty").get<double>();
  }
  c.smoother_depth = j.value("smoother_depth", c.smoother_depth);
  c.calibration = j.value("calibration", c.calibration);
}

SessionConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("config: cannot open " + path.string());
  SessionConfig config;
  try {
    config = nlohmann::json::parse(in).get<SessionConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("config: " + path.string() + ": " + e.what());
  }
  config.validate();
  return config;
}

}  // namespace ssvep
