#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>
#include <string>
#include <thread>

#include "ssvep/errors.hpp"
#include "ssvep/pipeline.hpp"
#include "ssvep/sigmodel.hpp"

namespace ssvep::pipeline {

std::vector<EegWindow> segment(const EegWindow& recording, const WindowPolicy& policy) {
  policy.validate();
  recording.validate();
  const auto len = static_cast<std::size_t>(std::llround(policy.length_s * recording.fs));
  const auto hop = static_cast<std::size_t>(std::llround(policy.hop_s * recording.fs));
  if (len < 2 || hop < 1) throw std::invalid_argument("segment: window shorter than two samples");
  const std::size_t n = recording.size();
  if (n < len) {
    throw DataError("segment: recording of " + std::to_string(n) + " samples is shorter than one " +
                    std::to_string(policy.length_s) + " s window");
  }

  std::vector<EegWindow> windows;
  const std::size_t full = (n - len) / hop + 1;
  windows.reserve(full + 1);
  for (std::size_t i = 0; i < full; ++i) {
    const std::size_t start = i * hop;
    windows.emplace_back(std::vector<double>(recording.samples.begin() + static_cast<std::ptrdiff_t>(start),
                                             recording.samples.begin() + static_cast<std::ptrdiff_t>(start + len)),
                         recording.fs, recording.t0 + static_cast<double>(start) / recording.fs);
  }
  if (!policy.drop_partial) {
    const std::size_t start = full * hop;
    if (start < n && n - start >= 2) {
      windows.emplace_back(std::vector<double>(recording.samples.begin() + static_cast<std::ptrdiff_t>(start),
                                               recording.samples.end()),
                           recording.fs, recording.t0 + static_cast<double>(start) / recording.fs);
    }
  }
  return windows;
}

double FeatureRecord::argmax_freq() const {
  if (t_values.empty() || t_values.size() != probe_freqs.size()) {
    throw std::invalid_argument("FeatureRecord: no T values");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < t_values.size(); ++i) {
    if (t_values[i] > t_values[best] ||
        (t_values[i] == t_values[best] && probe_freqs[i] < probe_freqs[best])) {
      best = i;
    }
  }
  return probe_freqs[best];
}

FeatureOptions FeatureOptions::from_config(const SessionConfig& config) {
  FeatureOptions o;
  o.n_harmonics = config.n_harmonics;
  o.ar_order = config.ar_order;
  o.calibration = config.calibration;
  return o;
}

FeatureRecord extract_window_features(const EegWindow& window, std::span<const double> probe_freqs,
                                      const FeatureOptions& options) {
  if (probe_freqs.empty()) throw std::invalid_argument("extract_features: empty probe set");
  FeatureRecord rec;
  rec.probe_freqs.assign(probe_freqs.begin(), probe_freqs.end());
  rec.t0 = window.t0;
  const sigmodel::TStatOptions topts{options.n_harmonics, options.ar_order, options.calibration};
  for (double f : probe_freqs) rec.t_values.push_back(sigmodel::t_statistic_detail(window, f, topts).t);
  return rec;
}

std::vector<FeatureRecord> extract_features(const std::vector<EegWindow>& windows,
                                            std::span<const double> probe_freqs,
                                            const FeatureOptions& options, const std::string& trial_id,
                                            std::optional<double> true_freq) {
  if (probe_freqs.empty()) throw std::invalid_argument("extract_features: empty probe set");
  std::vector<FeatureRecord> records(windows.size());

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      records[i] = extract_window_features(windows[i], probe_freqs, options);
      records[i].trial_id = trial_id;
      records[i].window_index = i;
      records[i].true_freq = true_freq;
    }
  };

  std::size_t threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, windows.size() / 8));
  if (threads == 1) {
    work(0, windows.size());
    return records;
  }
  std::vector<std::future<void>> jobs;
  const std::size_t chunk = (windows.size() + threads - 1) / threads;
  for (std::size_t b = 0; b < windows.size(); b += chunk) {
    jobs.push_back(std::async(std::launch::async, work, b, std::min(windows.size(), b + chunk)));
  }
  for (auto& j : jobs) j.get();  // rethrows worker exceptions
  return records;
}

}  // namespace ssvep::pipeline
