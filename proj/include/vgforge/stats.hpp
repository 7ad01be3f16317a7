#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "vgforge/manifest.hpp"

namespace vgforge::dataset {

struct Summary {
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;

  void add(double v);
  void finish();

 private:
  double sum_ = 0.0;
};

struct StatsReport {
  std::size_t records = 0;
  std::size_t C = 0;
  std::size_t M = 0;
  std::array<Summary, 3> base_variance;   // accepted categories, pre-mix
  std::size_t base_below_threshold = 0;
  std::array<Summary, 3> cloud_variance;  // stored instance clouds, post-mix
  Summary white_pixels;
  std::vector<std::size_t> category_counts;
  double balance_ratio = 0.0;  // max / min category count
  std::uint64_t attempts = 0;
  double acceptance_rate = 0.0;
  std::vector<std::string> missing;        // "<record index>: <path>"
  std::vector<std::size_t> zero_white;     // record indices with an all-black image

  nlohmann::json to_json() const;
};

/// Reads every stored cloud and image under `root` (the manifest directory).
StatsReport dataset_stats(const DatasetManifest& m, const std::filesystem::path& root, int workers = 1);

}  // namespace vgforge::dataset
