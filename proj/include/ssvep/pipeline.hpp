#pragma once

// Offline and live classification on top of the T statistic: windowing,
// feature extraction, least-squares linear classification, evaluation,
// decision smoothing and information-transfer-rate reporting.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssvep/config.hpp"
#include "ssvep/dataio.hpp"
#include "ssvep/types.hpp"

namespace ssvep::pipeline {

// Windows of exactly round(length_s * fs) samples at round(hop_s * fs)
// strides. The trailing partial window is dropped when drop_partial is set,
// otherwise it is emitted shorter. Throws DataError if the recording is
// shorter than one window.
std::vector<EegWindow> segment(const EegWindow& recording, const WindowPolicy& policy);

struct FeatureRecord {
  std::optional<double> true_freq;
  std::vector<double> probe_freqs;
  std::vector<double> t_values;  // parallel to probe_freqs
  std::string trial_id;
  std::size_t window_index{0};
  double t0{0.0};

  // Probe with the largest T; ties go to the smaller frequency.
  double argmax_freq() const;
};

struct FeatureOptions {
  std::size_t n_harmonics{2};
  std::size_t ar_order{20};
  double calibration{1.0};
  // 0 = use std::thread::hardware_concurrency().
  std::size_t threads{0};

  static FeatureOptions from_config(const SessionConfig& config);
};

FeatureRecord extract_window_features(const EegWindow& window, std::span<const double> probe_freqs,
                                      const FeatureOptions& options);

// One record per window, T per probe. Throws std::invalid_argument for an
// empty probe set.
std::vector<FeatureRecord> extract_features(const std::vector<EegWindow>& windows,
                                            std::span<const double> probe_freqs,
                                            const FeatureOptions& options,
                                            const std::string& trial_id = {},
                                            std::optional<double> true_freq = std::nullopt);

// Least-squares linear model over (T_1..T_K, 1).
//
// Binary mode (two classes): one weight row fitted to +1 for the larger
// label and -1 for the smaller one; a positive response predicts the larger
// label, zero or negative predicts the smaller one. More than two classes
// use one row per class (one-vs-rest) and argmax, ties to the smaller label.
struct LinearClassifier {
  std::vector<double> classes;      // ascending
  std::vector<double> probe_freqs;  // feature order
  std::vector<std::vector<double>> weights;
  double window_length_s{0.0};
  // Design matrix was rank deficient; fit via pseudoinverse.
  bool degenerate{false};
  // Features carried no information; predicts the training majority.
  bool majority_fallback{false};

  std::vector<double> responses(std::span<const double> t_values) const;
  double predict(std::span<const double> t_values) const;
  double predict(const FeatureRecord& record) const;
};

// Throws DataError on fewer than 2 records, fewer than 2 classes, unlabeled
// records, or mismatched probe sets.
LinearClassifier train_classifier(std::span<const FeatureRecord> train, double window_length_s = 0.0);

struct EvalReport {
  double accuracy{0.0};
  std::vector<double> classes;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::size_t n_windows{0};
  double window_length_s{0.0};
  double itr_bits_per_min{0.0};
};

void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);
void to_json(nlohmann::json& j, const LinearClassifier& c);
void from_json(const nlohmann::json& j, LinearClassifier& c);

// Throws DataError on an empty test set or labels unknown to the classifier.
EvalReport evaluate(const LinearClassifier& classifier, std::span<const FeatureRecord> test,
                    double window_length_s);

// Emits a winner only once the same frequency has won `depth` consecutive
// windows. Must be fed in time order.
class SlidingSmoother {
 public:
  explicit SlidingSmoother(std::size_t depth);

  std::optional<double> push(double winner);
  void reset();
  std::size_t depth() const { return depth_; }

 private:
  std::size_t depth_;
  std::optional<double> current_;
  std::size_t run_{0};
};

// Per-record decisions using each record's argmax probe; nullopt = undecided.
std::vector<std::optional<double>> sliding_smoother(std::span<const FeatureRecord> records,
                                                    std::size_t depth);

// Wolpaw bits/min, 0 log 0 = 0, clamped at 0 below chance.
double itr_bits_per_min(std::size_t n_classes, double accuracy, double decision_period_s);

// Trial-ordered protocol split: the first trial of each label trains, every
// later labeled trial tests. Unlabeled trials are ignored.
struct ProtocolSplit {
  std::vector<std::size_t> train_trials;
  std::vector<std::size_t> test_trials;
};
ProtocolSplit first_trial_split(const dataio::Dataset& dataset);

struct ProtocolResult {
  LinearClassifier classifier;
  EvalReport report;
  std::vector<FeatureRecord> train_features;
  std::vector<FeatureRecord> test_features;
};

// Segments every trial, extracts features, trains on the training trials and
// evaluates on the rest.
std::vector<FeatureRecord> dataset_features(const dataio::Dataset& dataset,
                                            std::span<const std::size_t> trial_indices,
                                            const WindowPolicy& policy, std::span<const double> probes,
                                            const FeatureOptions& options);
ProtocolResult run_protocol(const dataio::Dataset& dataset, const WindowPolicy& policy,
                            std::span<const double> probes, const FeatureOptions& options);

}  // namespace ssvep::pipeline
