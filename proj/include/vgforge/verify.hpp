#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "vgforge/manifest.hpp"

namespace vgforge::dataset {

struct Check {
  std::string name;
  bool ok = true;
  std::size_t violations = 0;
  std::string first_violation;
};

struct VerifyOptions {
  /// Regenerate every cloud and image from seeds and compare hashes.
  bool regenerate = true;
  int workers = 1;
  /// Seed of the record iteration order used for the label-stream digest.
  std::uint64_t label_seed = 0;
};

struct VerifyReport {
  std::vector<Check> checks;
  std::string manifest_digest;
  std::string label_stream_digest;

  bool ok() const;
  nlohmann::json to_json() const;
};

/// Deterministic record order shared with external loaders: indices sorted by
/// mix64(seed + 0x9E3779B97F4A7C15 * (i + 1)), ties by index.
std::vector<std::size_t> iteration_order(std::size_t n, std::uint64_t seed);

/// SHA-256 over "<category_id>\n" for every record in iteration_order(N, seed).
std::string label_stream_digest(const DatasetManifest& m, std::uint64_t seed);

/// Full property suite against a manifest and the files next to it.
VerifyReport verify_dataset(const std::filesystem::path& manifest_path, const VerifyOptions& opts = {});

}  // namespace vgforge::dataset
