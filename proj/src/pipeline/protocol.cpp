#include <cmath>
#include <set>
#include <stdexcept>

#include "ssvep/errors.hpp"
#include "ssvep/pipeline.hpp"

namespace ssvep::pipeline {

SlidingSmoother::SlidingSmoother(std::size_t depth) : depth_(depth) {
  if (depth_ < 1) throw std::invalid_argument("SlidingSmoother: depth must be >= 1");
}

std::optional<double> SlidingSmoother::push(double winner) {
  if (current_ && *current_ == winner) {
    ++run_;
  } else {
    current_ = winner;
    run_ = 1;
  }
  if (run_ >= depth_) return current_;
  return std::nullopt;
}

void SlidingSmoother::reset() {
  current_.reset();
  run_ = 0;
}

std::vector<std::optional<double>> sliding_smoother(std::span<const FeatureRecord> records,
                                                    std::size_t depth) {
  SlidingSmoother smoother(depth);
  std::vector<std::optional<double>> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(smoother.push(r.argmax_freq()));
  return out;
}

double itr_bits_per_min(std::size_t n_classes, double accuracy, double decision_period_s) {
  if (n_classes < 2) throw std::invalid_argument("itr: need at least 2 classes");
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) throw std::invalid_argument("itr: accuracy must be in [0, 1]");
  if (!(decision_period_s > 0.0)) throw std::invalid_argument("itr: decision period must be positive");

  const double n = static_cast<double>(n_classes);
  if (accuracy <= 1.0 / n) return 0.0;
  double bits = std::log2(n);
  if (accuracy > 0.0) bits += accuracy * std::log2(accuracy);
  if (accuracy < 1.0) bits += (1.0 - accuracy) * std::log2((1.0 - accuracy) / (n - 1.0));
  return std::max(bits, 0.0) * 60.0 / decision_period_s;
}

ProtocolSplit first_trial_split(const dataio::Dataset& dataset) {
  ProtocolSplit split;
  std::set<double> seen;
  for (std::size_t i = 0; i < dataset.trials.size(); ++i) {
    const auto& label = dataset.trials[i].entry.freq;
    if (!label) continue;
    if (seen.insert(*label).second) {
      split.train_trials.push_back(i);
    } else {
      split.test_trials.push_back(i);
    }
  }
  return split;
}

std::vector<FeatureRecord> dataset_features(const dataio::Dataset& dataset,
                                            std::span<const std::size_t> trial_indices,
                                            const WindowPolicy& policy, std::span<const double> probes,
                                            const FeatureOptions& options) {
  std::vector<FeatureRecord> out;
  for (std::size_t idx : trial_indices) {
    const auto& trial = dataset.trials.at(idx);
    auto records = extract_features(segment(trial.signal, policy), probes, options,
                                    trial.entry.trial_id, trial.entry.freq);
    out.insert(out.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
  }
  return out;
}

ProtocolResult run_protocol(const dataio::Dataset& dataset, const WindowPolicy& policy,
                            std::span<const double> probes, const FeatureOptions& options) {
  const ProtocolSplit split = first_trial_split(dataset);
  if (split.test_trials.empty()) throw DataError("protocol: no test trials after the training trials");

  ProtocolResult result;
  result.train_features = dataset_features(dataset, split.train_trials, policy, probes, options);
  result.test_features = dataset_features(dataset, split.test_trials, policy, probes, options);
  result.classifier = train_classifier(result.train_features, policy.length_s);
  result.report = evaluate(result.classifier, result.test_features, policy.length_s);
  return result;
}

}  // namespace ssvep::pipeline
