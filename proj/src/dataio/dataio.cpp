#include "ssvep/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include "ssvep/errors.hpp"

namespace fs = std::filesystem;

namespace ssvep::dataio {

namespace {

constexpr double kTimestampTol = 1.5e-6;  // 1 us spacing tolerance + 6-decimal rounding
constexpr double kFsRelTol = 1e-3;

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line);
}

bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  if (text.empty()) return false;
  const char* first = text.data();
  if (*first == '+') ++first;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool spacing_consistent(const std::vector<double>& t, double rate) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (std::abs(t[i] - t[0] - static_cast<double>(i) / rate) > kTimestampTol) return false;
  }
  return true;
}

double infer_fs(const std::vector<double>& t, const fs::path& path) {
  std::vector<double> deltas(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) deltas[i - 1] = t[i] - t[i - 1];
  std::nth_element(deltas.begin(), deltas.begin() + deltas.size() / 2, deltas.end());
  const double median = deltas[deltas.size() / 2];
  if (!(median > 0.0)) throw DataError(path.string() + ": cannot infer sampling rate");
  const double estimate = 1.0 / median;

  const double snapped = std::round(estimate);
  if (snapped > 0.0 && std::abs(snapped - estimate) / estimate < kFsRelTol &&
      spacing_consistent(t, snapped)) {
    return snapped;
  }
  const double span = t.back() - t.front();
  return span > 0.0 ? static_cast<double>(t.size() - 1) / span : estimate;
}

}  // namespace

EegWindow read_trial_csv(const fs::path& path, std::optional<double> expected_fs) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open trial file " + path.string());

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw DataError(where(path, 1) + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (line != "t,uv") throw DataError(where(path, 1) + ": expected header 't,uv', got '" + line + "'");

  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    double t = 0.0;
    double v = 0.0;
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos ||
        !parse_double(std::string_view(line).substr(0, comma), t) ||
        !parse_double(std::string_view(line).substr(comma + 1), v)) {
      throw DataError(where(path, line_no) + ": malformed row '" + line + "'");
    }
    if (!std::isfinite(t) || !std::isfinite(v)) {
      throw DataError(where(path, line_no) + ": non-finite value");
    }
    if (!times.empty() && !(t > times.back())) {
      throw DataError(where(path, line_no) + ": timestamps must be strictly increasing");
    }
    times.push_back(t);
    values.push_back(v);
  }
  if (values.empty()) throw DataError(path.string() + ": no samples");

  double rate = 0.0;
  if (times.size() >= 2) {
    rate = infer_fs(times, path);
    if (expected_fs) {
      if (std::abs(rate - *expected_fs) / *expected_fs > kFsRelTol) {
        throw DataError(path.string() + ": sampling rate " + std::to_string(rate) +
                        " Hz disagrees with expected " + std::to_string(*expected_fs) + " Hz");
      }
      rate = *expected_fs;
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (std::abs(times[i] - times[0] - static_cast<double>(i) / rate) > kTimestampTol) {
        // header is line 1, first sample line 2
        throw DataError(where(path, i + 2) + ": timestamp off the 1/fs grid");
      }
    }
  } else {
    if (!expected_fs) throw DataError(path.string() + ": single sample, sampling rate unknown");
    rate = *expected_fs;
  }
  return EegWindow(std::move(values), rate, times.front());
}

void write_trial_csv(const EegWindow& window, const fs::path& path) {
  if (window.samples.empty()) throw std::invalid_argument("write_trial_csv: empty window");
  if (!(window.fs > 0.0)) throw std::invalid_argument("write_trial_csv: fs must be positive");

  std::string out;
  out.reserve(window.size() * 28 + 8);
  out += "t,uv\n";
  char buf[64];
  for (std::size_t i = 0; i < window.size(); ++i) {
    const double t = window.t0 + static_cast<double>(i) / window.fs;
    int len = std::snprintf(buf, sizeof(buf), "%.6f,", t);
    out.append(buf, static_cast<std::size_t>(len));
    const auto res = std::to_chars(buf, buf + sizeof(buf), window.samples[i]);
    out.append(buf, res.ptr);
    out += '\n';
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write trial file " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("write failed for " + path.string());
}

nlohmann::json manifest_to_json(const Dataset& dataset) {
  nlohmann::json j = dataset.extras.is_object() ? dataset.extras : nlohmann::json::object();
  j["version"] = kManifestVersion;
  j["fs"] = dataset.fs;
  j["probe_freqs"] = dataset.probe_freqs;
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& trial : dataset.trials) {
    const auto& e = trial.entry;
    nlohmann::json t = e.extras.is_object() ? e.extras : nlohmann::json::object();
    t["trial_id"] = e.trial_id;
    t["freq"] = e.freq ? nlohmann::json(*e.freq) : nlohmann::json(nullptr);
    t["file"] = e.file;
    t["duration_s"] = e.duration_s;
    t["seed"] = e.seed ? nlohmann::json(*e.seed) : nlohmann::json(nullptr);
    trials.push_back(std::move(t));
  }
  j["trials"] = std::move(trials);
  return j;
}

Dataset load_session(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open manifest " + manifest_path.string());

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest " + manifest_path.string() + ": " + e.what());
  }

  const auto version = j.value("version", nlohmann::json());
  const bool version_ok = (version.is_string() && version.get<std::string>() == kManifestVersion) ||
                          (version.is_number_integer() && version.get<int>() == 1);
  if (!version_ok) {
    throw DataError("manifest " + manifest_path.string() + ": unsupported schema version " +
                    version.dump() + " (expected \"1\")");
  }

  Dataset dataset;
  const fs::path root = manifest_path.parent_path();
  try {
    dataset.fs = j.at("fs").get<double>();
    dataset.probe_freqs = j.value("probe_freqs", std::vector<double>{});
    for (const auto& t : j.at("trials")) {
      Trial trial;
      auto& e = trial.entry;
      e.trial_id = t.at("trial_id").get<std::string>();
      if (t.contains("freq") && !t.at("freq").is_null()) e.freq = t.at("freq").get<double>();
      e.file = t.at("file").get<std::string>();
      e.duration_s = t.at("duration_s").get<double>();
      if (t.contains("seed") && !t.at("seed").is_null()) e.seed = t.at("seed").get<std::uint64_t>();
      e.extras = t;
      for (const char* key : {"trial_id", "freq", "file", "duration_s", "seed"}) e.extras.erase(key);
      dataset.trials.push_back(std::move(trial));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest " + manifest_path.string() + ": " + e.what());
  }
  if (!(dataset.fs > 0.0)) throw DataError("manifest: fs must be positive");

  dataset.extras = j;
  for (const char* key : {"version", "fs", "probe_freqs", "trials"}) dataset.extras.erase(key);

  for (auto& trial : dataset.trials) {
    const fs::path file = root / trial.entry.file;
    if (!fs::exists(file)) {
      throw DataError("manifest: trial '" + trial.entry.trial_id + "' references missing file " +
                      file.string());
    }
    trial.signal = read_trial_csv(file, dataset.fs);
    const double expected_rows = trial.entry.duration_s * dataset.fs;
    if (std::abs(static_cast<double>(trial.signal.size()) - expected_rows) > 0.5) {
      throw DataError("manifest: trial '" + trial.entry.trial_id + "' has " +
                      std::to_string(trial.signal.size()) + " rows, expected " +
                      std::to_string(expected_rows));
    }
  }
  return dataset;
}

fs::path save_session(const Dataset& dataset, const fs::path& dir, const std::string& manifest_name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

  for (const auto& trial : dataset.trials) write_trial_csv(trial.signal, dir / trial.entry.file);

  const fs::path manifest = dir / manifest_name;
  std::ofstream out(manifest, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + manifest.string());
  out << manifest_to_json(dataset).dump(2) << '\n';
  return manifest;
}

}  // namespace ssvep::dataio
