#include <gtest/gtest.h>

#include "ssvep/errors.hpp"
#include "ssvep/pipeline.hpp"
#include "ssvep/synthgen.hpp"
#include "test_support.hpp"

using namespace ssvep;
using namespace ssvep::pipeline;
using ssvep::testing::gaussian;

namespace {

FeatureRecord record(double label, std::vector<double> t, std::vector<double> probes = {12.0, 15.0}) {
  FeatureRecord r;
  r.true_freq = label;
  r.probe_freqs = std::move(probes);
  r.t_values = std::move(t);
  return r;
}

// Wolpaw ITR written out from its definition.
double itr_oracle(double n, double p, double t) {
  double bits = std::log2(n);
  if (p > 0.0) bits += p * std::log2(p);
  if (p < 1.0) bits += (1.0 - p) * std::log2((1.0 - p) / (n - 1.0));
  return bits * 60.0 / t;
}

}  // namespace

// ---- segment --------------------------------------------------------------

TEST(Segment, ExactDivision) {
  const EegWindow rec(std::vector<double>(60 * 512, 0.0), 512.0);
  const auto w = segment(rec, {2.0, 2.0, true});
  ASSERT_EQ(w.size(), 30u);
  EXPECT_EQ(w[0].size(), 1024u);
  EXPECT_DOUBLE_EQ(w[29].t0, 58.0);
}

TEST(Segment, RemainderDropped) {
  const EegWindow rec(std::vector<double>(61 * 512, 0.0), 512.0);
  EXPECT_EQ(segment(rec, {2.0, 2.0, true}).size(), 30u);
  const auto kept = segment(rec, {2.0, 2.0, false});
  ASSERT_EQ(kept.size(), 31u);
  EXPECT_EQ(kept.back().size(), 512u);
}

TEST(Segment, OverlappingCountMatchesEnumeration) {
  const EegWindow rec(std::vector<double>(60 * 512, 0.0), 512.0);
  std::size_t expected = 0;
  for (std::size_t start = 0; start + 1024 <= rec.size(); start += 256) ++expected;
  const auto w = segment(rec, {2.0, 0.5, true});
  EXPECT_EQ(w.size(), expected);
  EXPECT_EQ(w.size(), 117u);
}

TEST(Segment, WindowsCopyTheRightSamples) {
  std::vector<double> x(100);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = double(i);
  const auto w = segment(EegWindow(x, 10.0, 5.0), {2.0, 1.5, true});
  ASSERT_EQ(w.size(), 6u);
  EXPECT_EQ(w[1].samples.front(), 15.0);
  EXPECT_EQ(w[1].samples.back(), 34.0);
  EXPECT_DOUBLE_EQ(w[1].t0, 6.5);
}

TEST(Segment, Errors) {
  const EegWindow rec(std::vector<double>(100, 0.0), 100.0);
  EXPECT_THROW(segment(rec, {2.0, 2.0, true}), DataError);
  EXPECT_THROW(segment(rec, {0.5, 1.0, true}), std::invalid_argument);
}

// ---- features -------------------------------------------------------------

TEST(Features, FifteenHzTrialsFavourFifteen) {
  const auto d = synthgen::generate_session(SessionConfig{}, 1, 20.0, synthgen::snr_profile("medium"), 11);
  const auto& trial = d.trials[1];
  ASSERT_EQ(trial.entry.freq, 15.0);
  const std::vector<double> probes{12.0, 15.0};
  const auto recs = extract_features(segment(trial.signal, {2.0, 2.0, true}), probes, FeatureOptions{},
                                     trial.entry.trial_id, trial.entry.freq);
  ASSERT_EQ(recs.size(), 10u);
  double t12 = 0.0, t15 = 0.0;
  for (const auto& r : recs) {
    t12 += r.t_values[0];
    t15 += r.t_values[1];
    EXPECT_EQ(r.true_freq, 15.0);
    EXPECT_EQ(r.trial_id, trial.entry.trial_id);
  }
  EXPECT_GT(t15, t12);
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(recs[i].window_index, i);
}

TEST(Features, SingleAndEmptyProbeSets) {
  const std::vector<EegWindow> windows{EegWindow(gaussian(1024, 1), 512.0), EegWindow(gaussian(1024, 2), 512.0)};
  const std::vector<double> one{15.0};
  const auto recs = extract_features(windows, one, FeatureOptions{});
  ASSERT_EQ(recs.size(), 2u);
  EXPECT_EQ(recs[0].t_values.size(), 1u);
  EXPECT_THROW(extract_features(windows, std::vector<double>{}, FeatureOptions{}), std::invalid_argument);
}

TEST(Features, ThreadCountDoesNotChangeResults) {
  std::vector<EegWindow> windows;
  for (std::uint64_t s = 0; s < 13; ++s) windows.emplace_back(gaussian(512, s), 512.0);
  const std::vector<double> probes{12.0, 15.0};
  FeatureOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const auto a = extract_features(windows, probes, one), b = extract_features(windows, probes, many);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].t_values, b[i].t_values);
}

TEST(Features, ArgmaxTiesGoToSmallerFrequency) {
  EXPECT_EQ(record(12.0, {2.0, 2.0}).argmax_freq(), 12.0);
  EXPECT_EQ(record(12.0, {1.0, 2.0}).argmax_freq(), 15.0);
}

// ---- classifier -----------------------------------------------------------

TEST(Classifier, SeparatedClusters) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.1);
  std::vector<FeatureRecord> train;
  for (int i = 0; i < 20; ++i) {
    train.push_back(record(12.0, {5.0 + n(rng), 1.0 + n(rng)}));
    train.push_back(record(15.0, {1.0 + n(rng), 5.0 + n(rng)}));
  }
  const auto clf = train_classifier(train, 2.0);
  EXPECT_FALSE(clf.degenerate);
  EXPECT_FALSE(clf.majority_fallback);
  EXPECT_EQ(clf.classes, (std::vector<double>{12.0, 15.0}));
  EXPECT_DOUBLE_EQ(evaluate(clf, train, 2.0).accuracy, 1.0);
}

TEST(Classifier, IdenticalFeaturesFallBackToMajority) {
  std::vector<FeatureRecord> train;
  for (int i = 0; i < 3; ++i) train.push_back(record(12.0, {1.0, 1.0}));
  for (int i = 0; i < 5; ++i) train.push_back(record(15.0, {1.0, 1.0}));
  const auto clf = train_classifier(train, 1.0);
  EXPECT_TRUE(clf.degenerate);
  EXPECT_TRUE(clf.majority_fallback);
  const std::vector<double> any{7.0, -3.0};
  EXPECT_EQ(clf.predict(any), 15.0);
}

TEST(Classifier, CollinearFeaturesUsePseudoinverse) {
  std::vector<FeatureRecord> train;
  for (int i = 0; i < 10; ++i) {
    const double v = i;
    train.push_back(record(i < 5 ? 12.0 : 15.0, {v, 2.0 * v}));
  }
  const auto clf = train_classifier(train, 1.0);
  EXPECT_TRUE(clf.degenerate);
  EXPECT_FALSE(clf.majority_fallback);
  EXPECT_DOUBLE_EQ(evaluate(clf, train, 1.0).accuracy, 1.0);
}

TEST(Classifier, TrainingErrors) {
  EXPECT_THROW(train_classifier(std::vector<FeatureRecord>{record(12.0, {1.0, 2.0})}), DataError);
  EXPECT_THROW(train_classifier(std::vector<FeatureRecord>{record(12.0, {1.0, 2.0}), record(12.0, {2.0, 1.0})}),
               DataError);
  auto unlabeled = record(12.0, {1.0, 2.0});
  unlabeled.true_freq.reset();
  EXPECT_THROW(train_classifier(std::vector<FeatureRecord>{record(15.0, {1.0, 2.0}), unlabeled}), DataError);
}

TEST(Classifier, BinaryBoundaryGoesToSmallerLabel) {
  LinearClassifier clf;
  clf.classes = {12.0, 15.0};
  clf.probe_freqs = {12.0, 15.0};
  clf.weights = {{-1.0, 1.0, 0.0}};
  EXPECT_EQ(clf.predict(std::vector<double>{3.0, 3.0}), 12.0);
  EXPECT_EQ(clf.predict(std::vector<double>{3.0, 3.1}), 15.0);
  EXPECT_THROW(clf.predict(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Classifier, OneVsRestForThreeClasses) {
  std::vector<FeatureRecord> train;
  const std::vector<double> probes{8.0, 10.0, 12.0};
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 0.2);
  for (int i = 0; i < 15; ++i) {
    train.push_back(record(8.0, {4.0 + n(rng), 1.0 + n(rng), 1.0 + n(rng)}, probes));
    train.push_back(record(10.0, {1.0 + n(rng), 4.0 + n(rng), 1.0 + n(rng)}, probes));
    train.push_back(record(12.0, {1.0 + n(rng), 1.0 + n(rng), 4.0 + n(rng)}, probes));
  }
  const auto clf = train_classifier(train, 2.0);
  EXPECT_EQ(clf.weights.size(), 3u);
  const auto rep = evaluate(clf, train, 2.0);
  EXPECT_DOUBLE_EQ(rep.accuracy, 1.0);
  EXPECT_EQ(rep.confusion.size(), 3u);
}

TEST(Classifier, TrainingAccuracyAtLeastHeldOutOnAverage) {
  SessionConfig cfg;
  double train_acc = 0.0, test_acc = 0.0;
  const int seeds = 100;
  FeatureOptions opts;
  opts.threads = 1;
  for (int s = 0; s < seeds; ++s) {
    const auto d = synthgen::generate_session(cfg, 2, 8.0, synthgen::snr_profile("low"), 5000 + s);
    const auto res = run_protocol(d, {1.0, 1.0, true}, cfg.probe_freqs, opts);
    train_acc += evaluate(res.classifier, res.train_features, 1.0).accuracy;
    test_acc += res.report.accuracy;
  }
  EXPECT_GE(train_acc / seeds, test_acc / seeds);
}

// ---- evaluate -------------------------------------------------------------

TEST(Evaluate, PerfectClassifier) {
  LinearClassifier clf;
  clf.classes = {12.0, 15.0};
  clf.probe_freqs = {12.0, 15.0};
  clf.weights = {{-1.0, 1.0, 0.0}};
  std::vector<FeatureRecord> test{record(12.0, {3.0, 1.0}), record(15.0, {1.0, 3.0}), record(15.0, {0.0, 9.0})};
  const auto rep = evaluate(clf, test, 2.0);
  EXPECT_DOUBLE_EQ(rep.accuracy, 1.0);
  EXPECT_EQ(rep.confusion, (std::vector<std::vector<std::size_t>>{{1, 0}, {0, 2}}));
  EXPECT_DOUBLE_EQ(rep.itr_bits_per_min, 30.0);
  EXPECT_THROW(evaluate(clf, std::vector<FeatureRecord>{record(10.0, {1.0, 2.0})}, 2.0), DataError);
  EXPECT_THROW(evaluate(clf, std::vector<FeatureRecord>{}, 2.0), DataError);
}

TEST(Evaluate, RandomPredictorIsAtChance) {
  // the classifier reads the sign of t2 - t1, and those are iid noise
  LinearClassifier clf;
  clf.classes = {12.0, 15.0};
  clf.probe_freqs = {12.0, 15.0};
  clf.weights = {{-1.0, 1.0, 0.0}};
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<FeatureRecord> test;
  for (int i = 0; i < 10000; ++i) test.push_back(record(i % 2 ? 15.0 : 12.0, {n(rng), n(rng)}));
  EXPECT_NEAR(evaluate(clf, test, 1.0).accuracy, 0.5, 0.05);
}

TEST(Evaluate, ReportJsonRoundTrip) {
  EvalReport r;
  r.accuracy = 0.875;
  r.classes = {12.0, 15.0};
  r.confusion = {{7, 1}, {1, 7}};
  r.n_windows = 16;
  r.window_length_s = 2.0;
  r.itr_bits_per_min = itr_bits_per_min(2, 0.875, 2.0);
  const nlohmann::json j = r;
  const auto back = j.get<EvalReport>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_EQ(back.confusion, r.confusion);
  EXPECT_EQ(back.accuracy, r.accuracy);
}

TEST(Evaluate, ClassifierJsonRoundTrip) {
  std::vector<FeatureRecord> train{record(12.0, {3.0, 1.0}), record(15.0, {1.0, 3.0}), record(12.0, {2.5, 1.2})};
  const auto clf = train_classifier(train, 1.0);
  const auto back = nlohmann::json(clf).get<LinearClassifier>();
  EXPECT_EQ(back.weights, clf.weights);
  EXPECT_EQ(back.classes, clf.classes);
  EXPECT_EQ(back.window_length_s, 1.0);
  nlohmann::json broken = clf;
  broken["weights"][0].push_back(1.0);
  EXPECT_THROW(broken.get<LinearClassifier>(), DataError);
}

// ---- smoother -------------------------------------------------------------

TEST(Smoother, DepthOneIsArgmax) {
  std::vector<FeatureRecord> recs;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 50; ++i) recs.push_back(record(12.0, {n(rng), n(rng)}));
  const auto out = sliding_smoother(recs, 1);
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(out[i], recs[i].argmax_freq());
}

TEST(Smoother, AlternatingNeverDecides) {
  std::vector<FeatureRecord> recs;
  for (int i = 0; i < 12; ++i) recs.push_back(record(12.0, i % 2 ? std::vector<double>{1, 2} : std::vector<double>{2, 1}));
  for (const auto& d : sliding_smoother(recs, 3)) EXPECT_FALSE(d.has_value());
}

TEST(Smoother, FirstDecisionAtThirdWindow) {
  std::vector<FeatureRecord> recs(5, record(15.0, {1.0, 4.0}));
  const auto out = sliding_smoother(recs, 3);
  const std::vector<std::optional<double>> want{std::nullopt, std::nullopt, 15.0, 15.0, 15.0};
  EXPECT_EQ(out, want);
}

TEST(Smoother, RunResetsOnChange) {
  SlidingSmoother s(2);
  EXPECT_FALSE(s.push(12.0));
  EXPECT_EQ(s.push(12.0), 12.0);
  EXPECT_FALSE(s.push(15.0));
  EXPECT_EQ(s.push(15.0), 15.0);
  s.reset();
  EXPECT_FALSE(s.push(15.0));
  EXPECT_THROW(SlidingSmoother(0), std::invalid_argument);
}

// ---- ITR ------------------------------------------------------------------

TEST(Itr, SpotValues) {
  EXPECT_DOUBLE_EQ(itr_bits_per_min(2, 1.0, 2.0), 30.0);
  EXPECT_DOUBLE_EQ(itr_bits_per_min(2, 0.5, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(itr_bits_per_min(2, 0.3, 2.0), 0.0);
}

TEST(Itr, MatchesDefinition) {
  EXPECT_NEAR(itr_bits_per_min(2, 0.9, 2.0), itr_oracle(2, 0.9, 2.0), 1e-12);
  EXPECT_NEAR(itr_bits_per_min(2, 0.9, 2.0), 15.930, 0.001);
  EXPECT_NEAR(itr_bits_per_min(4, 0.8, 1.0), itr_oracle(4, 0.8, 1.0), 1e-12);
  EXPECT_THROW(itr_bits_per_min(1, 0.9, 1.0), std::invalid_argument);
  EXPECT_THROW(itr_bits_per_min(2, 0.9, 0.0), std::invalid_argument);
}

// ---- protocol -------------------------------------------------------------

TEST(Protocol, FirstTrialOfEachLabelTrains) {
  const auto d = synthgen::generate_session(SessionConfig{}, 3, 2.0, synthgen::snr_profile("high"), 1);
  const auto split = first_trial_split(d);
  EXPECT_EQ(split.train_trials, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(split.test_trials, (std::vector<std::size_t>{2, 3, 4, 5}));
}

TEST(Protocol, HighSnrRunIsAccurate) {
  const auto d = synthgen::generate_session(SessionConfig{}, 3, 30.0, synthgen::snr_profile("high"), 2);
  const std::vector<double> probes{12.0, 15.0};
  const auto res = run_protocol(d, {2.0, 2.0, true}, probes, FeatureOptions{});
  EXPECT_EQ(res.train_features.size(), 30u);
  EXPECT_EQ(res.test_features.size(), 60u);
  EXPECT_GE(res.report.accuracy, 0.95);
  EXPECT_EQ(res.report.n_windows, 60u);
}
