// ssvep: command-line front end for simulation, offline analysis and the
// streaming daemon.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 numerical failure.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ssvep/errors.hpp"
#include "ssvep/kernels.hpp"
#include "ssvep/pipeline.hpp"
#include "ssvep/sigmodel.hpp"
#include "ssvep/streamd.hpp"
#include "ssvep/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config_path;
  std::uint64_t seed{1};
  std::string output_dir{"out"};
};

ssvep::SessionConfig load_globals_config(const Globals& g) {
  if (g.config_path.empty()) return {};
  return ssvep::load_config(g.config_path);
}

fs::path manifest_path(const std::string& dataset) {
  fs::path p(dataset);
  if (fs::is_directory(p)) p /= "session.json";
  return p;
}

fs::path output_file(const Globals& g, const std::string& name) {
  fs::create_directories(g.output_dir);
  return fs::path(g.output_dir) / name;
}

// Write to a temporary sibling and rename, so a failed run leaves no
// half-written artifact behind.
void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw ssvep::DataError("cannot write " + tmp.string());
    out << text;
    if (!out) throw ssvep::DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<double> probes_for(const Globals& g, const ssvep::SessionConfig& config,
                               const ssvep::dataio::Dataset& dataset) {
  if (g.config_path.empty() && !dataset.probe_freqs.empty()) return dataset.probe_freqs;
  return config.probe_freqs;
}

std::string fmt_freq(double f) {
  std::ostringstream s;
  s << f;
  return s.str();
}

// ---- simulate ------------------------------------------------------------

struct SimulateArgs {
  std::size_t trials{2};
  double duration{30.0};
  std::string snr{"high"};
  std::optional<double> amplitude;
  std::string background{"ar"};
  bool bandpass{false};
  bool quantize{false};
};

int cmd_simulate(const Globals& g, const SimulateArgs& a) {
  if (a.trials < 1) throw UsageError("--trials must be at least 1");
  if (!(a.duration > 0.0)) throw UsageError("--duration must be positive");
  const ssvep::SessionConfig config = load_globals_config(g);

  ssvep::synthgen::SnrProfile profile =
      a.amplitude ? ssvep::synthgen::snr_profile_with_amplitude(*a.amplitude) : ssvep::synthgen::snr_profile(a.snr);
  if (a.background == "pink") {
    profile.background = ssvep::synthgen::Background::Pink;
  } else if (a.background != "ar") {
    throw UsageError("--background must be ar or pink");
  }
  ssvep::synthgen::AcquisitionOptions acq;
  acq.bandpass = a.bandpass;
  acq.quantize = a.quantize;

  const auto dataset = ssvep::synthgen::generate_session(config, a.trials, a.duration, profile, g.seed, acq);
  fs::create_directories(g.output_dir);
  const fs::path manifest = ssvep::dataio::save_session(dataset, g.output_dir);
  std::cout << "wrote " << dataset.trials.size() << " trials (" << a.trials << " per frequency, " << a.duration
            << " s, profile " << profile.name << ", seed " << g.seed << ") to " << manifest.string() << '\n';
  return kOk;
}

// ---- analyze -------------------------------------------------------------

struct DatasetArgs {
  std::string dataset;
  double window{2.0};
  std::optional<double> hop;
};

ssvep::WindowPolicy policy_from(const DatasetArgs& a) {
  ssvep::WindowPolicy p{a.window, a.hop.value_or(a.window), true};
  try {
    p.validate();
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
  return p;
}

int cmd_analyze(const Globals& g, const DatasetArgs& a) {
  const auto config = load_globals_config(g);
  const auto dataset = ssvep::dataio::load_session(manifest_path(a.dataset));
  const auto policy = policy_from(a);
  const auto probes = probes_for(g, config, dataset);
  const auto options = ssvep::pipeline::FeatureOptions::from_config(config);

  std::vector<std::size_t> every(dataset.trials.size());
  for (std::size_t i = 0; i < every.size(); ++i) every[i] = i;
  const auto records = ssvep::pipeline::dataset_features(dataset, every, policy, probes, options);

  std::ostringstream csv;
  csv << "trial_id,window_index,true_freq";
  for (double f : probes) csv << ",T_" << fmt_freq(f);
  csv << '\n' << std::setprecision(17);
  for (const auto& r : records) {
    csv << r.trial_id << ',' << r.window_index << ',';
    if (r.true_freq) csv << *r.true_freq;
    for (double t : r.t_values) csv << ',' << t;
    csv << '\n';
  }

  // in-sample least-squares probe over all labeled windows: a separability
  // score for the scatter, not a generalization estimate
  std::vector<ssvep::pipeline::FeatureRecord> labeled;
  for (const auto& r : records) {
    if (r.true_freq) labeled.push_back(r);
  }
  std::optional<double> probe_acc;
  if (labeled.size() >= 2) {
    try {
      const auto clf = ssvep::pipeline::train_classifier(labeled, policy.length_s);
      probe_acc = ssvep::pipeline::evaluate(clf, labeled, policy.length_s).accuracy;
    } catch (const ssvep::DataError&) {
      // single class: nothing to separate
    }
  }

  const fs::path out = output_file(g, "features.csv");
  write_text(out, csv.str());
  std::cout << "wrote " << records.size() << " feature rows (" << policy.length_s << " s windows) to "
            << out.string() << '\n';
  if (probe_acc) {
    std::cout << "linear probe accuracy: " << std::fixed << std::setprecision(4) << *probe_acc << '\n';
  }
  return kOk;
}

// ---- train / eval --------------------------------------------------------

int cmd_train(const Globals& g, const DatasetArgs& a) {
  const auto config = load_globals_config(g);
  const auto dataset = ssvep::dataio::load_session(manifest_path(a.dataset));
  const auto policy = policy_from(a);
  const auto probes = probes_for(g, config, dataset);
  const auto options = ssvep::pipeline::FeatureOptions::from_config(config);

  const auto split = ssvep::pipeline::first_trial_split(dataset);
  if (split.train_trials.empty()) throw ssvep::DataError("train: dataset has no labeled trials");
  const auto train = ssvep::pipeline::dataset_features(dataset, split.train_trials, policy, probes, options);
  const auto clf = ssvep::pipeline::train_classifier(train, policy.length_s);

  const fs::path out = output_file(g, "classifier.json");
  write_text(out, json(clf).dump(2) + "\n");
  std::cout << "trained on " << train.size() << " windows from " << split.train_trials.size()
            << " first trials; wrote " << out.string() << '\n';
  if (clf.majority_fallback) std::cout << "warning: features carried no information, majority fallback\n";
  if (clf.degenerate) std::cout << "warning: rank-deficient design, pseudoinverse fit\n";
  return kOk;
}

struct EvalArgs {
  std::string dataset;
  std::string classifier;
  std::vector<double> windows;
};

json report_row(const ssvep::pipeline::EvalReport& r) {
  json row = r;
  return row;
}

int cmd_eval(const Globals& g, const EvalArgs& a) {
  const auto config = load_globals_config(g);
  const auto dataset = ssvep::dataio::load_session(manifest_path(a.dataset));
  const auto probes = probes_for(g, config, dataset);
  const auto options = ssvep::pipeline::FeatureOptions::from_config(config);
  const auto split = ssvep::pipeline::first_trial_split(dataset);
  if (split.test_trials.empty()) throw ssvep::DataError("eval: no test trials after the first trial of each label");

  json rows = json::array();
  if (!a.classifier.empty()) {
    std::ifstream in(a.classifier);
    if (!in) throw ssvep::DataError("cannot open classifier " + a.classifier);
    ssvep::pipeline::LinearClassifier clf;
    try {
      clf = json::parse(in).get<ssvep::pipeline::LinearClassifier>();
    } catch (const json::exception& ex) {
      throw ssvep::DataError("bad classifier file " + a.classifier + ": " + ex.what());
    }
    if (!(clf.window_length_s > 0.0)) throw ssvep::DataError("classifier has no window length");
    const ssvep::WindowPolicy policy{clf.window_length_s, clf.window_length_s, true};
    const auto test = ssvep::pipeline::dataset_features(dataset, split.test_trials, policy, clf.probe_freqs, options);
    rows.push_back(report_row(ssvep::pipeline::evaluate(clf, test, policy.length_s)));
  } else {
    std::vector<ssvep::WindowPolicy> policies;
    if (a.windows.empty()) {
      policies = config.window_policies;
    } else {
      for (double w : a.windows) policies.push_back({w, w, true});
    }
    for (const auto& p : policies) {
      try {
        p.validate();
      } catch (const std::invalid_argument& ex) {
        throw UsageError(ex.what());
      }
      const auto result = ssvep::pipeline::run_protocol(dataset, p, probes, options);
      rows.push_back(report_row(result.report));
    }
  }

  json report{{"protocol", "first trial per label trains, later trials test"},
              {"probe_freqs", probes},
              {"n_train_trials", split.train_trials.size()},
              {"n_test_trials", split.test_trials.size()},
              {"rows", rows}};
  const fs::path out = output_file(g, "report.json");
  write_text(out, report.dump(2) + "\n");

  std::cout << "window_s  accuracy  windows  itr_bits_per_min\n";
  for (const auto& row : rows) {
    std::printf("%8.2f  %7.1f%%  %7zu  %16.2f\n", row["window_length_s"].get<double>(),
                100.0 * row["accuracy"].get<double>(), row["n_windows"].get<std::size_t>(),
                row["itr_bits_per_min"].get<double>());
  }
  std::cout << "wrote " << out.string() << '\n';
  return kOk;
}

// ---- psd -----------------------------------------------------------------

struct PsdArgs {
  std::string dataset;
  std::string input;
  std::string trial;
  std::optional<std::size_t> max_lag;
};

int cmd_psd(const Globals& g, const PsdArgs& a) {
  if (a.dataset.empty() == a.input.empty()) throw UsageError("psd: give exactly one of --dataset or --input");
  ssvep::EegWindow signal;
  std::string label;
  if (!a.input.empty()) {
    signal = ssvep::dataio::read_trial_csv(a.input);
    label = a.input;
  } else {
    const auto dataset = ssvep::dataio::load_session(manifest_path(a.dataset));
    const ssvep::dataio::Trial* chosen = nullptr;
    for (const auto& t : dataset.trials) {
      if (a.trial.empty() || t.entry.trial_id == a.trial) {
        chosen = &t;
        break;
      }
    }
    if (!chosen) throw ssvep::DataError("psd: no trial '" + a.trial + "' in dataset");
    signal = chosen->signal;
    label = chosen->entry.trial_id;
  }
  const auto psd = ssvep::sigmodel::psd_via_autocorrelation(signal, a.max_lag);

  std::ostringstream csv;
  csv << "freq_hz,power\n" << std::setprecision(17);
  for (std::size_t i = 0; i < psd.freqs.size(); ++i) csv << psd.freqs[i] << ',' << psd.power[i] << '\n';
  const fs::path out = output_file(g, "psd.csv");
  write_text(out, csv.str());

  // strongest local maxima above 1 Hz, for a quick look
  std::vector<std::pair<double, double>> peaks;
  for (std::size_t i = 1; i + 1 < psd.power.size(); ++i) {
    if (psd.freqs[i] > 1.0 && psd.power[i] > psd.power[i - 1] && psd.power[i] >= psd.power[i + 1]) {
      peaks.emplace_back(psd.power[i], psd.freqs[i]);
    }
  }
  std::sort(peaks.rbegin(), peaks.rend());
  std::cout << "psd of " << label << " (" << signal.size() << " samples): " << psd.freqs.size() << " bins to "
            << out.string() << "\npeaks (Hz):";
  for (std::size_t i = 0; i < std::min<std::size_t>(3, peaks.size()); ++i) std::cout << ' ' << peaks[i].second;
  std::cout << '\n';
  return kOk;
}

// ---- serve / replay ------------------------------------------------------

struct ServeArgs {
  std::string listen{"127.0.0.1:7878"};
  std::string ws_listen;
  std::string classifier;
  std::optional<std::size_t> smoother_depth;
  std::size_t threads{2};
};

ssvep::streamd::Endpoint endpoint_arg(const std::string& text) {
  try {
    return ssvep::streamd::parse_endpoint(text);
  } catch (const std::invalid_argument& ex) {
    throw UsageError(ex.what());
  }
}

int cmd_serve(const Globals& g, const ServeArgs& a) {
  ssvep::streamd::ServerOptions so;
  so.tcp = endpoint_arg(a.listen);
  if (!a.ws_listen.empty()) so.websocket = endpoint_arg(a.ws_listen);
  so.threads = a.threads;

  ssvep::streamd::HubOptions ho;
  ho.config = load_globals_config(g);
  if (a.smoother_depth) {
    if (*a.smoother_depth < 1) throw UsageError("--smoother-depth must be >= 1");
    ho.config.smoother_depth = *a.smoother_depth;
  }
  if (!a.classifier.empty()) {
    std::ifstream in(a.classifier);
    if (!in) throw ssvep::DataError("cannot open classifier " + a.classifier);
    try {
      ho.classifier = json::parse(in).get<ssvep::pipeline::LinearClassifier>();
    } catch (const json::exception& ex) {
      throw ssvep::DataError("bad classifier file " + a.classifier + ": " + ex.what());
    }
  }

  // handled synchronously below, so block them before any thread starts
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ssvep::streamd::Hub hub(std::move(ho));
  ssvep::streamd::Server server(so, hub);
  try {
    server.start();
  } catch (const std::runtime_error& ex) {
    throw UsageError(ex.what());
  }
  std::cout << "listening tcp " << so.tcp.host << ':' << server.tcp_port();
  if (auto ws = server.websocket_port()) std::cout << " ws " << so.websocket->host << ':' << *ws;
  std::cout << " (kernels: " << ssvep::kernels::backend_name(ssvep::kernels::active().backend) << ")" << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  std::cout << "stopped" << std::endl;
  return kOk;
}

struct ReplayArgs {
  std::string dataset;
  std::string connect{"127.0.0.1:7878"};
  bool realtime{false};
  std::size_t batch{32};
  std::string session{"replay"};
  std::string trial;
  std::string log{"events.jsonl"};
};

int cmd_replay(const Globals& g, const ReplayArgs& a) {
  if (a.batch < 1) throw UsageError("--batch must be >= 1");
  const auto server = endpoint_arg(a.connect);
  const auto dataset = ssvep::dataio::load_session(manifest_path(a.dataset));

  ssvep::streamd::ReplayOptions ro;
  ro.batch_size = a.batch;
  ro.realtime = a.realtime;
  ro.session = a.session;
  if (!a.trial.empty()) ro.trial_id = a.trial;
  if (!g.config_path.empty()) ro.config = load_globals_config(g);

  std::ostringstream log;
  const auto result = ssvep::streamd::replay_to_server(server, dataset, ro, &log);
  const fs::path out = output_file(g, a.log);
  write_text(out, log.str());

  std::size_t features = 0;
  std::map<double, std::size_t> decisions;
  for (const auto& e : result.events) {
    const std::string type = e["type"].get<std::string>();
    if (type == "feature") ++features;
    if (type == "decision") ++decisions[e["freq"].get<double>()];
  }
  std::cout << "sent " << result.batches << " batches in " << std::fixed << std::setprecision(2) << result.elapsed_s
            << " s; " << features << " feature events; decisions:";
  if (decisions.empty()) std::cout << " none";
  for (const auto& [f, n] : decisions) std::cout << ' ' << fmt_freq(f) << " Hz x" << n;
  std::cout << "\nwrote " << out.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SSVEP detection toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--config", g.config_path, "session config JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--output-dir", g.output_dir, "directory for all outputs")->capture_default_str();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a labeled synthetic dataset");
  simulate->add_option("--trials", sim.trials, "trials per frequency")->capture_default_str();
  simulate->add_option("--duration", sim.duration, "trial length in seconds")->capture_default_str();
  simulate->add_option("--snr", sim.snr, "zero|low|medium|high")->capture_default_str();
  simulate->add_option("--amplitude", sim.amplitude, "fundamental amplitude (overrides --snr)");
  simulate->add_option("--background", sim.background, "ar|pink")->capture_default_str();
  simulate->add_flag("--bandpass", sim.bandpass, "emulate a 3-100 Hz acquisition filter");
  simulate->add_flag("--quantize", sim.quantize, "emulate a 12-bit converter");

  DatasetArgs an;
  auto* analyze = app.add_subcommand("analyze", "T features per window, written to features.csv");
  analyze->add_option("--dataset", an.dataset, "dataset directory or manifest")->required();
  analyze->add_option("--window", an.window, "window length in seconds")->capture_default_str();
  analyze->add_option("--hop", an.hop, "hop in seconds (default: window)");

  DatasetArgs tr;
  auto* train = app.add_subcommand("train", "fit the linear classifier on the first trial of each label");
  train->add_option("--dataset", tr.dataset, "dataset directory or manifest")->required();
  train->add_option("--window", tr.window, "window length in seconds")->capture_default_str();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "accuracy per window length on the held-out trials");
  eval->add_option("--dataset", ev.dataset, "dataset directory or manifest")->required();
  eval->add_option("--classifier", ev.classifier, "classifier.json from train (default: retrain per window)");
  eval->add_option("--windows", ev.windows, "window lengths in seconds (default: from config)");

  PsdArgs ps;
  auto* psd = app.add_subcommand("psd", "power spectrum of a whole recording, written to psd.csv");
  psd->add_option("--dataset", ps.dataset, "dataset directory or manifest");
  psd->add_option("--trial", ps.trial, "trial id (default: first)");
  psd->add_option("--input", ps.input, "single trial CSV instead of a dataset");
  psd->add_option("--max-lag", ps.max_lag, "truncate and taper the autocovariance at this lag");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "run the streaming daemon until SIGINT/SIGTERM");
  serve->add_option("--listen", sv.listen, "TCP host:port")->capture_default_str();
  serve->add_option("--ws-listen", sv.ws_listen, "WebSocket host:port");
  serve->add_option("--classifier", sv.classifier, "classifier.json (default: argmax of T)");
  serve->add_option("--smoother-depth", sv.smoother_depth, "consecutive wins before a decision");
  serve->add_option("--threads", sv.threads, "I/O threads")->capture_default_str();

  ReplayArgs rp;
  auto* replay = app.add_subcommand("replay", "stream a dataset into a running daemon");
  replay->add_option("--dataset", rp.dataset, "dataset directory or manifest")->required();
  replay->add_option("--connect", rp.connect, "daemon host:port")->capture_default_str();
  replay->add_flag("--realtime", rp.realtime, "pace batches at the sampling rate");
  replay->add_option("--batch", rp.batch, "samples per batch")->capture_default_str();
  replay->add_option("--session", rp.session, "session name")->capture_default_str();
  replay->add_option("--trial", rp.trial, "replay a single trial");
  replay->add_option("--log", rp.log, "event log file name under --output-dir")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) return cmd_simulate(g, sim);
    if (*analyze) return cmd_analyze(g, an);
    if (*train) return cmd_train(g, tr);
    if (*eval) return cmd_eval(g, ev);
    if (*psd) return cmd_psd(g, ps);
    if (*serve) return cmd_serve(g, sv);
    if (*replay) return cmd_replay(g, rp);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ssvep::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
