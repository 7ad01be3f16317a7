#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vgforge/ifs.hpp"
#include "vgforge/projection.hpp"

namespace vgforge::dataset {

inline constexpr int kFormatVersion = 1;

enum class Generator { Fractal, Perlin };

std::string to_string(Generator g);
Generator parse_generator(const std::string& s);

/// Everything besides (C, M, seed, generator) that changes generated bytes.
struct BuildConfig {
  std::size_t points = ifs::kDefaultPoints;
  double threshold = ifs::kDefaultVarianceThreshold;
  double mix_ratio = ifs::kDefaultMixRatio;
  std::size_t transforms = ifs::kDefaultTransforms;
  bool contractive = true;
  int rejection_cap = 1000;
  std::size_t reserve_donors = 8;
  double camera_radius = projection::kDefaultCameraRadius;
  projection::ProjectionConfig projection{};
  int perlin_grid_w = 100;
  int perlin_grid_h = 100;
  double perlin_min_scale = 1.2;
  double perlin_max_scale = 2.0;

  void validate() const;
};

struct Seeds {
  std::uint64_t category_seed = 0;
  std::uint64_t run_seed = 0;
  std::uint64_t mix_seed = 0;
  std::uint64_t cam_seed = 0;

  bool operator==(const Seeds&) const = default;
};

/// One accepted generator. Reserve categories (donor-only) carry ids >= C.
struct CategoryRecord {
  int id = 0;
  std::uint64_t category_seed = 0;
  int attempts = 0;  // rejection-loop attempts spent on this slot
  std::uint64_t canonical_run_seed = 0;
  Vec3 variance{};
  double frequency = 0.0;  // perlin only
  double scale = 0.0;      // perlin only
};

struct InstanceRecord {
  int category_id = 0;
  int instance_id = 0;
  int image_label = 0;
  int cloud_label = 0;
  std::string point_cloud_path;  // relative to the manifest
  std::string image_path;
  projection::CameraPose camera{};
  std::optional<int> mix_donor_category;
  Seeds seeds{};
  std::string pcb_sha256;
  std::string png_sha256;
};

struct ShuffleInfo {
  std::string mode;  // "category" | "instance_category"
  std::uint64_t seed = 0;
};

struct DatasetManifest {
  int format_version = kFormatVersion;
  std::string name;
  std::size_t C = 0;
  std::size_t M = 0;
  Generator generator = Generator::Fractal;
  std::uint64_t global_seed = 0;
  BuildConfig config{};
  std::uint64_t total_attempts = 0;
  std::vector<CategoryRecord> categories;
  std::vector<CategoryRecord> reserve_categories;
  std::vector<InstanceRecord> records;
  std::optional<ShuffleInfo> shuffle;

  std::size_t N() const noexcept { return C * M; }
  double acceptance_rate() const noexcept;
  /// Looks up a regular or reserve category by id; nullptr if absent.
  const CategoryRecord* find_category(int id) const noexcept;
};

nlohmann::json to_json(const BuildConfig& cfg);
BuildConfig build_config_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DatasetManifest& m);
/// Throws InvalidParameter on unsupported format_version or missing fields.
DatasetManifest manifest_from_json(const nlohmann::json& j);

/// Canonical UTF-8 text (sorted keys, 2-space indent, trailing newline).
std::string serialize(const DatasetManifest& m);
std::string manifest_digest(const DatasetManifest& m);

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::filesystem::path& path);

}  // namespace vgforge::dataset
