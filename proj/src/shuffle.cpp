#include "vgforge/shuffle.hpp"

#include "vgforge/error.hpp"
#include "vgforge/rng.hpp"

namespace vgforge::dataset {

std::string to_string(ShuffleMode m) { return m == ShuffleMode::Category ? "category" : "instance_category"; }

ShuffleMode parse_shuffle_mode(const std::string& s) {
  if (s == "category") return ShuffleMode::Category;
  if (s == "instance_category") return ShuffleMode::InstanceCategory;
  throw InvalidParameter("unknown shuffle mode '" + s + "' (expected category|instance_category)");
}

std::vector<std::size_t> label_permutation(ShuffleMode mode, std::uint64_t seed, std::size_t C, std::size_t N) {
  Rng rng(derive_seed(seed, "shuffle", mode == ShuffleMode::Category ? 0 : 1));
  return rng.permutation(mode == ShuffleMode::Category ? C : N);
}

DatasetManifest shuffle_labels(const DatasetManifest& m, ShuffleMode mode, std::uint64_t seed) {
  if (m.shuffle) throw InvalidParameter("manifest is already shuffled (" + m.shuffle->mode + ")");
  DatasetManifest out = m;
  const auto perm = label_permutation(mode, seed, m.C, m.records.size());
  if (mode == ShuffleMode::Category) {
    for (auto& r : out.records) {
      if (r.cloud_label < 0 || static_cast<std::size_t>(r.cloud_label) >= m.C)
        throw InvalidParameter("cloud label out of range in record " + std::to_string(r.category_id) + "/" +
                               std::to_string(r.instance_id));
      r.cloud_label = static_cast<int>(perm[static_cast<std::size_t>(r.cloud_label)]);
    }
  } else {
    for (std::size_t j = 0; j < out.records.size(); ++j) out.records[j].cloud_label = m.records[perm[j]].cloud_label;
  }
  out.shuffle = ShuffleInfo{to_string(mode), seed};
  return out;
}

DatasetManifest restore_labels(const DatasetManifest& shuffled) {
  if (!shuffled.shuffle) return shuffled;
  const ShuffleMode mode = parse_shuffle_mode(shuffled.shuffle->mode);
  const auto perm = label_permutation(mode, shuffled.shuffle->seed, shuffled.C, shuffled.records.size());
  DatasetManifest out = shuffled;
  if (mode == ShuffleMode::Category) {
    std::vector<int> inverse(perm.size());
    for (std::size_t c = 0; c < perm.size(); ++c) inverse[perm[c]] = static_cast<int>(c);
    for (auto& r : out.records) r.cloud_label = inverse[static_cast<std::size_t>(r.cloud_label)];
  } else {
    for (std::size_t j = 0; j < perm.size(); ++j) out.records[perm[j]].cloud_label = shuffled.records[j].cloud_label;
  }
  out.shuffle.reset();
  return out;
}

std::filesystem::path shuffled_manifest_path(const std::filesystem::path& manifest_path, ShuffleMode mode,
                                             std::uint64_t seed) {
  return manifest_path.parent_path() / ("manifest.shuffle-" + to_string(mode) + "-" + std::to_string(seed) + ".json");
}

}  // namespace vgforge::dataset
