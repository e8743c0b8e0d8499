#pragma once

// Versioned binary model container:
//
//   magic "AEMF" | u32 version | u64 header_len | header JSON
//   | u64 float_count | float32 parameter blob | u32 crc32
//
// The CRC covers every preceding byte; any corruption is rejected at
// load time, unknown versions are refused outright.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aemon/calibration.hpp"
#include "aemon/model.hpp"

namespace aemon {

struct Provenance {
  uint64_t seed = 0;
  std::string config_hash;
  std::string corpus_hash;
  // Manifest-relative paths of the nominal runs reserved for calibration.
  std::vector<std::string> holdout_runs;
};

struct ModelArtifact {
  ModelBundle bundle;
  std::optional<ThresholdProfile> profile;
  std::vector<Channel> channels;
  double sample_rate = 500.0;
  Provenance provenance;
};

void save_model(const ModelArtifact& artifact, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

// FNV-1a content hashes used for provenance fields.
uint64_t fnv1a_bytes(const void* data, size_t size, uint64_t h = 0xcbf29ce484222325ull);
std::string hash_file(const std::filesystem::path& path);
std::string hash_string(const std::string& s);

}  // namespace aemon
