#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vgforge/manifest.hpp"

namespace vgforge::dataset {

/// Category: one permutation of category ids applied to every point-cloud label.
/// InstanceCategory: one permutation over all N point-cloud label slots.
enum class ShuffleMode { Category, InstanceCategory };

std::string to_string(ShuffleMode m);
ShuffleMode parse_shuffle_mode(const std::string& s);

/// The permutation a (mode, seed) pair draws: size C for Category, N for InstanceCategory.
std::vector<std::size_t> label_permutation(ShuffleMode mode, std::uint64_t seed, std::size_t C, std::size_t N);

/// Derived manifest with only cloud labels permuted. Image labels are untouched.
DatasetManifest shuffle_labels(const DatasetManifest& m, ShuffleMode mode, std::uint64_t seed);

/// Inverse of shuffle_labels, using the shuffle info recorded in the manifest.
DatasetManifest restore_labels(const DatasetManifest& shuffled);

/// "<dir>/manifest.shuffle-<mode>-<seed>.json" next to the source manifest.
std::filesystem::path shuffled_manifest_path(const std::filesystem::path& manifest_path, ShuffleMode mode,
                                             std::uint64_t seed);

}  // namespace vgforge::dataset
