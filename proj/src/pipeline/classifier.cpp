#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "ssvep/errors.hpp"
#include "ssvep/pipeline.hpp"

namespace ssvep::pipeline {

namespace {

bool same_probes(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

std::size_t class_index(const std::vector<double>& classes, double label) {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == label) return i;
  }
  throw DataError("label " + std::to_string(label) + " Hz is not one of the classifier classes");
}

}  // namespace

std::vector<double> LinearClassifier::responses(std::span<const double> t_values) const {
  if (t_values.size() != probe_freqs.size()) {
    throw std::invalid_argument("classifier: expected " + std::to_string(probe_freqs.size()) +
                                " features, got " + std::to_string(t_values.size()));
  }
  std::vector<double> out;
  out.reserve(weights.size());
  for (const auto& w : weights) {
    double r = w.back();
    for (std::size_t i = 0; i < t_values.size(); ++i) r += w[i] * t_values[i];
    out.push_back(r);
  }
  return out;
}

double LinearClassifier::predict(std::span<const double> t_values) const {
  const auto r = responses(t_values);
  if (classes.size() == 2 && r.size() == 1) return r[0] > 0.0 ? classes[1] : classes[0];
  std::size_t best = 0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (r[i] > r[best]) best = i;
  }
  return classes[best];
}

double LinearClassifier::predict(const FeatureRecord& record) const {
  if (!same_probes(record.probe_freqs, probe_freqs)) {
    throw DataError("classifier: record probe frequencies differ from the training probes");
  }
  return predict(record.t_values);
}

LinearClassifier train_classifier(std::span<const FeatureRecord> train, double window_length_s) {
  if (train.size() < 2) throw DataError("train_classifier: need at least 2 records");
  const auto& probes = train.front().probe_freqs;
  std::set<double> labels;
  for (const auto& r : train) {
    if (!r.true_freq) throw DataError("train_classifier: unlabeled record in training set");
    if (!same_probes(r.probe_freqs, probes) || r.t_values.size() != probes.size()) {
      throw DataError("train_classifier: probe frequency sets differ between records");
    }
    for (double t : r.t_values) {
      if (!std::isfinite(t)) throw DataError("train_classifier: non-finite feature");
    }
    labels.insert(*r.true_freq);
  }
  if (labels.size() < 2) {
    throw DataError("train_classifier: training set contains a single class (" +
                    std::to_string(*labels.begin()) + " Hz)");
  }

  LinearClassifier clf;
  clf.classes.assign(labels.begin(), labels.end());
  clf.probe_freqs = probes;
  clf.window_length_s = window_length_s;

  const auto rows = static_cast<Eigen::Index>(train.size());
  const auto k = static_cast<Eigen::Index>(probes.size());
  Eigen::MatrixXd x(rows, k + 1);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = train[static_cast<std::size_t>(i)].t_values[static_cast<std::size_t>(j)];
    x(i, k) = 1.0;
  }

  const bool binary = clf.classes.size() == 2;
  const std::size_t n_models = binary ? 1 : clf.classes.size();
  Eigen::MatrixXd y(rows, static_cast<Eigen::Index>(n_models));
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double label = *train[static_cast<std::size_t>(i)].true_freq;
    for (std::size_t m = 0; m < n_models; ++m) {
      const double positive = binary ? clf.classes[1] : clf.classes[m];
      y(i, static_cast<Eigen::Index>(m)) = label == positive ? 1.0 : -1.0;
    }
  }

  bool constant_features = true;
  for (Eigen::Index j = 0; j < k && constant_features; ++j) {
    constant_features = x.col(j).maxCoeff() == x.col(j).minCoeff();
  }

  Eigen::MatrixXd w;
  if (constant_features) {
    clf.degenerate = true;
    clf.majority_fallback = true;
    w = Eigen::MatrixXd::Zero(k + 1, static_cast<Eigen::Index>(n_models));
    w.row(k) = y.colwise().mean();
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(x);
    cod.setThreshold(1e-12);
    clf.degenerate = cod.rank() < k + 1;
    w = cod.solve(y);
  }

  for (std::size_t m = 0; m < n_models; ++m) {
    std::vector<double> row(static_cast<std::size_t>(k) + 1);
    for (Eigen::Index j = 0; j <= k; ++j) row[static_cast<std::size_t>(j)] = w(j, static_cast<Eigen::Index>(m));
    for (double v : row) {
      if (!std::isfinite(v)) throw NumericalError("train_classifier: non-finite weights");
    }
    clf.weights.push_back(std::move(row));
  }
  return clf;
}

EvalReport evaluate(const LinearClassifier& classifier, std::span<const FeatureRecord> test,
                    double window_length_s) {
  if (test.empty()) throw DataError("evaluate: empty test set");
  EvalReport report;
  report.classes = classifier.classes;
  const std::size_t k = classifier.classes.size();
  report.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (const auto& r : test) {
    if (!r.true_freq) throw DataError("evaluate: unlabeled record in test set");
    const std::size_t truth = class_index(classifier.classes, *r.true_freq);
    const std::size_t pred = class_index(classifier.classes, classifier.predict(r));
    ++report.confusion[truth][pred];
    if (truth == pred) ++correct;
  }
  report.n_windows = test.size();
  report.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  report.window_length_s = window_length_s;
  report.itr_bits_per_min = window_length_s > 0.0 ? itr_bits_per_min(k, report.accuracy, window_length_s) : 0.0;
  return report;
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = nlohmann::json{{"accuracy", r.accuracy},
                     {"classes", r.classes},
                     {"confusion", r.confusion},
                     {"n_windows", r.n_windows},
                     {"window_length_s", r.window_length_s},
                     {"itr_bits_per_min", r.itr_bits_per_min}};
}

void from_json(const nlohmann::json& j, EvalReport& r) {
  r.accuracy = j.at("accuracy").get<double>();
  r.classes = j.value("classes", std::vector<double>{});
  r.confusion = j.at("confusion").get<std::vector<std::vector<std::size_t>>>();
  r.n_windows = j.at("n_windows").get<std::size_t>();
  r.window_length_s = j.at("window_length_s").get<double>();
  r.itr_bits_per_min = j.at("itr_bits_per_min").get<double>();
}

void to_json(nlohmann::json& j, const LinearClassifier& c) {
  j = nlohmann::json{{"mode", c.classes.size() == 2 ? "binary" : "one_vs_rest"},
                     {"classes", c.classes},
                     {"probe_freqs", c.probe_freqs},
                     {"weights", c.weights},
                     {"window_length_s", c.window_length_s},
                     {"degenerate", c.degenerate},
                     {"majority_fallback", c.majority_fallback}};
}

void from_json(const nlohmann::json& j, LinearClassifier& c) {
  c.classes = j.at("classes").get<std::vector<double>>();
  c.probe_freqs = j.at("probe_freqs").get<std::vector<double>>();
  c.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  c.window_length_s = j.value("window_length_s", 0.0);
  c.degenerate = j.value("degenerate", false);
  c.majority_fallback = j.value("majority_fallback", false);
  const std::size_t expected_rows = c.classes.size() == 2 ? 1 : c.classes.size();
  if (c.classes.size() < 2 || c.weights.size() != expected_rows) {
    throw DataError("classifier: weights do not match class count");
  }
  for (const auto& w : c.weights) {
    if (w.size() != c.probe_freqs.size() + 1) throw DataError("classifier: weight row has wrong length");
  }
}

}  // namespace ssvep::pipeline
