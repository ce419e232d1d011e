#pragma once

// Dataset persistence.
//
// A session is a JSON manifest plus one CSV file per trial, stored next to
// the manifest. Manifest schema version "1":
//
//   {
//     "version": "1",
//     "fs": 512,
//     "probe_freqs": [12, 15],
//     "trials": [
//       {"trial_id": "t00", "freq": 12, "file": "t00.csv", "duration_s": 30, "seed": 7},
//       {"trial_id": "t01", "freq": null, "file": "t01.csv", "duration_s": 30, "seed": null}
//     ]
//   }
//
// Trial order is meaningful: for each label the first trial is the training
// trial. Unknown keys (top level or per trial) are kept and written back.
//
// Trial CSV: UTF-8, LF line endings, header "t,uv", one row per sample,
// timestamps with 6 decimals, samples in shortest round-trip form.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ssvep/types.hpp"

namespace ssvep::dataio {

inline constexpr const char* kManifestVersion = "1";

struct TrialManifestEntry {
  std::string trial_id;
  std::optional<double> freq;  // stimulation frequency label, none for unlabeled
  std::string file;            // relative to the manifest directory
  double duration_s{0.0};
  std::optional<std::uint64_t> seed;
  nlohmann::json extras = nlohmann::json::object();
};

struct Trial {
  TrialManifestEntry entry;
  EegWindow signal;
};

struct Dataset {
  double fs{512.0};
  std::vector<double> probe_freqs;
  std::vector<Trial> trials;
  nlohmann::json extras = nlohmann::json::object();
};

// Reads a trial file. fs comes from the median timestamp spacing, snapped to
// the nearest integer rate when consistent; with expected_fs the inferred
// rate must agree within 0.1% and expected_fs is used. Throws DataError with
// the offending line number on malformed rows or non-finite samples.
EegWindow read_trial_csv(const std::filesystem::path& path,
                         std::optional<double> expected_fs = std::nullopt);

// Throws std::invalid_argument for an empty window, DataError on I/O failure.
void write_trial_csv(const EegWindow& window, const std::filesystem::path& path);

nlohmann::json manifest_to_json(const Dataset& dataset);

// Loads the manifest and every referenced trial, in manifest order. Throws
// DataError on schema version mismatch, dangling file references, or row
// counts inconsistent with duration_s * fs.
Dataset load_session(const std::filesystem::path& manifest_path);

// Writes trial CSVs and the manifest into dir (created if needed). Returns
// the manifest path.
std::filesystem::path save_session(const Dataset& dataset, const std::filesystem::path& dir,
                                   const std::string& manifest_name = "session.json");

}  // namespace ssvep::dataio
