// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Oracles are written out here independently of the library.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ssvep/errors.hpp"
#include "ssvep/kernels.hpp"
#include "ssvep/pipeline.hpp"
#include "ssvep/sigmodel.hpp"
#include "ssvep/streamd.hpp"
#include "ssvep/synthgen.hpp"
#include "test_support.hpp"

using namespace ssvep;
using ssvep::testing::brute_autocov;
using ssvep::testing::gaussian;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass{false};
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& ex) {
    o = {false, std::string("exception: ") + ex.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  %-34s %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// ---- kernels ------------------------------------------------------------

Outcome levinson_vs_toeplitz() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<std::size_t> order(1, 12);
  double worst = 0.0;
  for (int c = 0; c < 1000; ++c) {
    const std::size_t p = order(rng);
    const auto r = ssvep::testing::random_stationary_autocov(p, p, rng);
    const auto model = sigmodel::levinson_durbin(r, p);
    const auto [a, var] = ssvep::testing::toeplitz_solve(r, p);
    for (std::size_t j = 0; j < p; ++j) worst = std::max(worst, std::abs(model.coeffs[j] - a[j]));
    worst = std::max(worst, std::abs(model.innovation_var - var) / r[0]);
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-8 && secs < 10.0, fmt("max err %.3g over 1000 systems, %.2f s", worst, secs)};
}

Outcome autocov_fft_vs_direct() {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len(2, 4096);
  double worst = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = len(rng);
    const std::size_t max_lag = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
    auto x = gaussian(n, 1000 + c, 3.0);
    for (double& v : x) v += 5.0;  // non-zero mean
    const auto fast = sigmodel::autocovariance(x, max_lag);
    const auto slow = brute_autocov(x, max_lag);
    for (std::size_t k = 0; k <= max_lag; ++k) worst = std::max(worst, std::abs(fast[k] - slow[k]));
  }
  return {worst < 1e-9, fmt("max err %.3g over 100 windows", worst)};
}

Outcome projection_properties() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> len(64, 4096), harm(1, 3);
  std::uniform_real_distribution<double> freq(5.0, 40.0);
  double idem = 0.0, orth = 0.0, split = 0.0, vs_lsq = 0.0;
  for (int c = 0; c < 100; ++c) {
    const std::size_t n = len(rng), nh = harm(rng);
    const double f = freq(rng);
    const auto b = sigmodel::build_reference_basis(f, 512.0, n, nh);
    auto s = gaussian(n, 500 + c);
    const auto sig = ssvep::testing::sinusoid(n, f, 512.0, 2.0, 0.3);
    for (std::size_t i = 0; i < n; ++i) s[i] += sig[i];
    const auto r = sigmodel::project_out(s, b);
    const auto r2 = sigmodel::project_out(r, b);
    double es = 0.0, er = 0.0, ep = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      idem = std::max(idem, std::abs(r[i] - r2[i]));
      es += s[i] * s[i];
      er += r[i] * r[i];
      ep += (s[i] - r[i]) * (s[i] - r[i]);
    }
    split = std::max(split, std::abs(es - er - ep) / es);
    for (std::size_t col = 0; col < b.n_columns(); ++col) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) d += b.column(col)[i] * r[i];
      orth = std::max(orth, std::abs(d));
    }
    // least-squares residual via Householder QR on the raw sinusoids
    Eigen::MatrixXd X(n, 2 * nh);
    for (std::size_t k = 1; k <= nh; ++k)
      for (std::size_t i = 0; i < n; ++i) {
        const double ph = 2.0 * std::numbers::pi * double(k) * f * double(i) / 512.0;
        X(i, 2 * (k - 1)) = std::sin(ph);
        X(i, 2 * (k - 1) + 1) = std::cos(ph);
      }
    const Eigen::Map<const Eigen::VectorXd> sv(s.data(), n);
    const Eigen::VectorXd ref = sv - X * X.householderQr().solve(sv);
    for (std::size_t i = 0; i < n; ++i) vs_lsq = std::max(vs_lsq, std::abs(ref(i) - r[i]));
  }
  const bool ok = idem < 1e-8 && orth < 1e-8 && split < 1e-8 && vs_lsq < 1e-8;
  return {ok, fmt("idempotence %.2g, orthogonality %.2g, energy split %.2g, vs QR %.2g", idem, orth, split, vs_lsq)};
}

// ---- null calibration ---------------------------------------------------

// Means of T over the fixed null sets below, recorded from a reference run.
// They pin the calibration against regressions in any stage of T.
constexpr double kNullMean12 = 1.399632181;
constexpr double kNullMean15 = 1.392635146;

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(double(i) / double(a.size()) - double(j) / double(b.size())));
  }
  return d;
}

Outcome null_calibration() {
  const auto t0 = Clock::now();
  const std::size_t n = 5000;
  synthgen::NoiseSpec noise;
  noise.ar_model = synthgen::eeg_background_model(512.0);
  noise.white_std = 0.0;
  std::vector<double> t12(n), t15(n);
  for (std::size_t i = 0; i < n; ++i) {
    // separate windows per probe so the samples are independent
    const auto w12 = synthgen::generate_trial(std::nullopt, noise, 2.0, 512.0, synthgen::derive_seed(12, i));
    const auto w15 = synthgen::generate_trial(std::nullopt, noise, 2.0, 512.0, synthgen::derive_seed(15, i));
    t12[i] = sigmodel::t_statistic(w12, 12.0);
    t15[i] = sigmodel::t_statistic(w15, 15.0);
  }
  double m12 = 0.0, m15 = 0.0;
  for (std::size_t i = 0; i < n; ++i) m12 += t12[i], m15 += t15[i];
  m12 /= double(n);
  m15 /= double(n);
  const double d = ks_statistic(t12, t15);
  const double crit = 1.628 * std::sqrt(2.0 / double(n));  // alpha = 0.01
  const double secs = seconds_since(t0);
  const bool in_range = m12 >= 0.5 && m12 <= 2.0 && m15 >= 0.5 && m15 <= 2.0;
  const bool pinned = std::abs(m12 - kNullMean12) <= 1e-6 && std::abs(m15 - kNullMean15) <= 1e-6;
  return {in_range && pinned && d < crit && secs < 60.0,
          fmt("mean T12 %.9f T15 %.9f (pinned %s), KS D %.4f < %.4f, %.1f s", m12, m15, pinned ? "yes" : "no", d,
              crit, secs)};
}

// ---- end to end -----------------------------------------------------------

double protocol_accuracy(const dataio::Dataset& d, double window_s) {
  const std::vector<double> probes{12.0, 15.0};
  pipeline::FeatureOptions opts;
  return pipeline::run_protocol(d, {window_s, window_s, true}, probes, opts).report.accuracy;
}

dataio::Dataset protocol_session(const synthgen::SnrProfile& profile, std::uint64_t seed) {
  // 2 frequencies x (1 train + 2 test) x 30 s
  return synthgen::generate_session(SessionConfig{}, 3, 30.0, profile, seed);
}

Outcome end_to_end(Clock::time_point& started) {
  started = Clock::now();
  const auto d = protocol_session(synthgen::snr_profile("high"), 1);
  const double a2 = protocol_accuracy(d, 2.0), a1 = protocol_accuracy(d, 1.0);
  return {a2 >= 0.95 && a1 >= 0.85, fmt("high SNR accuracy 2 s %.3f (>= 0.95), 1 s %.3f (>= 0.85)", a2, a1)};
}

Outcome chance_at_zero_amplitude() {
  double sum = 0.0;
  double lo = 1.0, hi = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    const double a = protocol_accuracy(protocol_session(synthgen::snr_profile("zero"), 100 + s), 2.0);
    sum += a;
    lo = std::min(lo, a);
    hi = std::max(hi, a);
  }
  const double mean = sum / seeds;
  return {std::abs(mean - 0.5) <= 0.05,
          fmt("mean 2 s accuracy %.3f over %d seeds (range %.3f..%.3f)", mean, seeds, lo, hi)};
}

Outcome window_monotonicity(Clock::time_point e2e_start) {
  const std::vector<double> amps{0.2, 0.4, 0.6, 0.8, 1.0};
  const int seeds = 20;
  std::string detail;
  bool ok = true;
  for (double amp : amps) {
    double s1 = 0.0, s2 = 0.0;
    for (int s = 0; s < seeds; ++s) {
      const auto d = protocol_session(synthgen::snr_profile_with_amplitude(amp), 1000 + s);
      s1 += protocol_accuracy(d, 1.0);
      s2 += protocol_accuracy(d, 2.0);
    }
    s1 /= seeds;
    s2 /= seeds;
    ok = ok && s2 >= s1 - 0.02;
    detail += fmt("a=%.1f: %.3f/%.3f ", amp, s1, s2);
  }
  const double total = seconds_since(e2e_start);
  ok = ok && total < 300.0;
  return {ok, detail + fmt("(1 s/2 s), end-to-end total %.1f s", total)};
}

// ---- psd ----------------------------------------------------------------

Outcome psd_peaks() {
  const auto d = synthgen::generate_session(SessionConfig{}, 1, 60.0, synthgen::snr_profile("high"), 3);
  const auto& trial = d.trials[1];
  if (trial.entry.freq != 15.0) return {false, "unexpected trial order"};
  const auto psd = sigmodel::psd_via_autocorrelation(trial.signal);
  const double df = psd.freqs[1] - psd.freqs[0];
  std::vector<std::pair<double, double>> peaks;  // power, freq
  for (std::size_t i = 1; i + 1 < psd.power.size(); ++i) {
    if (psd.power[i] > psd.power[i - 1] && psd.power[i] >= psd.power[i + 1]) peaks.emplace_back(psd.power[i], psd.freqs[i]);
  }
  std::sort(peaks.rbegin(), peaks.rend());
  if (peaks.size() < 2) return {false, "fewer than two peaks"};
  double f1 = peaks[0].second, f2 = peaks[1].second;
  if (f1 > f2) std::swap(f1, f2);
  const bool ok = std::abs(f1 - 15.0) <= df && std::abs(f2 - 30.0) <= df;
  return {ok, fmt("top peaks %.3f and %.3f Hz (bin %.4f Hz)", f1, f2, df)};
}

// ---- frame schedules and ITR ---------------------------------------------

Outcome frame_schedules() {
  const auto a = synthgen::frame_schedule(15.0, 60.0, 0.5).pattern;
  const auto b = synthgen::frame_schedule(12.0, 60.0, 0.4).pattern;
  const bool ok = a == std::vector<int>{1, 1, 0, 0} && b == std::vector<int>{1, 1, 0, 0, 0};
  auto show = [](const std::vector<int>& v) {
    std::string s;
    for (int x : v) s += char('0' + x);
    return s;
  };
  return {ok, "15 Hz " + show(a) + ", 12 Hz " + show(b)};
}

Outcome itr_spot_values() {
  const double perfect = pipeline::itr_bits_per_min(2, 1.0, 2.0);
  const double chance = pipeline::itr_bits_per_min(2, 0.5, 2.0);
  return {perfect == 30.0 && chance == 0.0, fmt("P=1: %.17g, P=0.5: %.17g", perfect, chance)};
}

// ---- streamd --------------------------------------------------------------

Outcome replay_determinism() {
  auto d = synthgen::generate_session(SessionConfig{}, 1, 20.0, synthgen::snr_profile("high"), 4);
  std::erase_if(d.trials, [](const dataio::Trial& t) { return t.entry.freq != 15.0; });
  streamd::Hub hub(streamd::HubOptions{});
  streamd::ServerOptions so;
  so.tcp = {"127.0.0.1", 0};
  streamd::Server server(so, hub);
  server.start();
  const streamd::Endpoint ep{"127.0.0.1", server.tcp_port()};
  std::ostringstream log1, log2;
  const auto r1 = streamd::replay_to_server(ep, d, {}, &log1);
  const auto r2 = streamd::replay_to_server(ep, d, {}, &log2);
  server.stop();
  std::size_t decisions = 0, wrong = 0;
  for (const auto& e : r1.events) {
    if (e.at("type") != "decision") continue;
    ++decisions;
    if (e.at("freq").get<double>() != 15.0) ++wrong;
  }
  const bool same = !log1.str().empty() && log1.str() == log2.str();
  return {same && decisions > 0 && wrong == 0,
          fmt("logs %s (%zu events), %zu decisions, %zu not 15 Hz", same ? "identical" : "differ", r1.events.size(),
              decisions, wrong)};
}

}  // namespace

int main() {
  std::printf("ssvep acceptance, kernels: %s\n",
              std::string(kernels::backend_name(kernels::active().backend)).c_str());
  report("levinson vs toeplitz", levinson_vs_toeplitz);
  report("autocovariance fft vs direct", autocov_fft_vs_direct);
  report("projection properties", projection_properties);
  report("null calibration", null_calibration);
  Clock::time_point e2e_start;
  report("end-to-end high snr", [&] { return end_to_end(e2e_start); });
  report("end-to-end zero amplitude", chance_at_zero_amplitude);
  report("end-to-end window monotonicity", [&] { return window_monotonicity(e2e_start); });
  report("psd peaks", psd_peaks);
  report("frame schedules", frame_schedules);
  report("itr spot values", itr_spot_values);
  report("streamd replay determinism", replay_determinism);
  std::printf("%s: %d failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
