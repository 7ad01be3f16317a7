#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>

#include "vgforge/manifest.hpp"

namespace vgforge::dataset {

struct BuildOptions {
  std::size_t categories = 0;  // C
  std::size_t instances = 0;   // M
  std::uint64_t global_seed = 0;
  Generator generator = Generator::Fractal;
  std::filesystem::path out_dir;
  int workers = 1;
  BuildConfig config{};
  std::string name = "vg-fractaldb";
  /// Reuse records listed in an existing journal whose files still hash correctly.
  bool resume = true;
};

struct BuildResult {
  DatasetManifest manifest;
  std::filesystem::path manifest_path;
  std::string digest;
  std::size_t resumed_records = 0;
};

/// Category search, instance generation and persistence. Output bytes are a
/// pure function of (C, M, seed, generator, config), independent of workers.
/// Throws BuildError when a slot exhausts the rejection cap, IoError on I/O.
BuildResult build_dataset(const BuildOptions& opts);

/// Role-tagged seed helpers shared by the builder, render and verify.
namespace seeds {
std::uint64_t category_attempt(std::uint64_t global, bool reserve, std::size_t slot, int attempt);
std::uint64_t canonical_run(std::uint64_t category_seed);
std::uint64_t instance_run(std::uint64_t global, int category, int instance, int retry);
std::uint64_t mix(std::uint64_t global, int category, int instance);
std::uint64_t camera(std::uint64_t global, int category, int instance);
std::uint64_t donor(std::uint64_t global, int category, int instance);
}  // namespace seeds

/// Normalized base cloud of a category for a given run seed.
/// Throws DivergenceError for a diverging fractal generator.
PointCloud base_cloud(Generator g, const BuildConfig& cfg, const CategoryRecord& cat, std::uint64_t run_seed);

/// Result of one rejection-loop search.
struct CategorySearch {
  CategoryRecord record;
  PointCloud canonical;
};

/// Rejection loop for one slot: sample, generate, normalize, variance-filter.
/// `grid_categories` sizes the perlin (frequency, scale) grid.
CategorySearch search_category(Generator g, const BuildConfig& cfg, std::uint64_t global_seed, bool reserve,
                               std::size_t slot, int id, std::size_t grid_categories);

/// The mixed cloud of a record, regenerated from its seeds alone.
PointCloud instance_cloud(const DatasetManifest& m, const InstanceRecord& r);

/// Re-renders a record from its seeds.
std::pair<projection::FractalImage, projection::CameraPose> render_record(const DatasetManifest& m,
                                                                          const InstanceRecord& r);

/// Relative paths of a record's files under the dataset root.
std::string cloud_relpath(int category, int instance);
std::string image_relpath(int category, int instance);

}  // namespace vgforge::dataset
