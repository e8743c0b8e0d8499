#pragma once

// Dataset persistence.
//
// Run files are CSV with a header row `t,<channel names...>` and one row
// per sample; t is the 0-based sample index. Onset labels live in the
// manifest, not in the CSV. The manifest is JSON:
//
//   { "schema_version": 1, "sample_rate": 500.0,
//     "channels": [{"name": "force_x", "kind": "force"}, ...],
//     "runs": [{"path": "runs/nominal_000.csv", "kind": "nominal",
//               "scenario": "", "tag": "", "onset_index": null,
//               "seed": 123}, ...] }

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aemon/preprocessing.hpp"

namespace aemon {

struct RunEntry {
  std::string path;      // relative to the manifest directory
  std::string kind;      // "nominal" or "failure"
  std::string scenario;  // scenario name; empty for nominal runs
  std::string tag;       // failure tag; empty for nominal runs
  std::optional<int64_t> onset_index;
  uint64_t seed = 0;
};

struct DatasetManifest {
  int schema_version = 1;
  double sample_rate = 500.0;
  std::vector<Channel> channels;
  std::vector<RunEntry> runs;
};

// Lossless at float precision; writes are atomic (temp file + rename).
void write_run(const TimeSeries& series, const std::filesystem::path& path);

// Channel kinds default to `other` when no schema is given.
TimeSeries read_run(const std::filesystem::path& path);
// Validates the CSV header against the schema and applies its kinds.
TimeSeries read_run(const std::filesystem::path& path, const std::vector<Channel>& schema);

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

struct LoadedRun {
  RunEntry entry;
  TimeSeries series;  // labels filled in from the manifest
};

struct Corpus {
  std::filesystem::path root;
  DatasetManifest manifest;
  std::vector<LoadedRun> runs;

  std::vector<TimeSeries> nominal_series() const;
  std::vector<const LoadedRun*> failure_runs() const;
};

// Accepts the manifest path or its directory. Verifies that every
// referenced file exists and matches the channel schema.
Corpus load_corpus(const std::filesystem::path& manifest_or_dir);

}  // namespace aemon
