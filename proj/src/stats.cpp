#include "vgforge/stats.hpp"

#include <algorithm>
#include <limits>

#include "vgforge/error.hpp"
#include "vgforge/image_io.hpp"
#include "vgforge/pcb.hpp"

namespace vgforge::dataset {

using nlohmann::json;

void Summary::add(double v) {
  if (count == 0) min = max = v;
  min = std::min(min, v);
  max = std::max(max, v);
  sum_ += v;
  ++count;
}

void Summary::finish() { mean = count ? sum_ / static_cast<double>(count) : 0.0; }

namespace {

json summary_json(const Summary& s) { return {{"count", s.count}, {"min", s.min}, {"max", s.max}, {"mean", s.mean}}; }

json axes_json(const std::array<Summary, 3>& a) {
  return {{"x", summary_json(a[0])}, {"y", summary_json(a[1])}, {"z", summary_json(a[2])}};
}

struct RecordScan {
  bool cloud_ok = false;
  bool image_ok = false;
  Vec3 variance{};
  std::size_t white = 0;
  std::string missing;
};

}  // namespace

json StatsReport::to_json() const {
  return {{"records", records},
          {"C", C},
          {"M", M},
          {"base_variance", axes_json(base_variance)},
          {"base_below_threshold", base_below_threshold},
          {"cloud_variance", axes_json(cloud_variance)},
          {"white_pixels", summary_json(white_pixels)},
          {"category_counts", category_counts},
          {"balance_ratio", balance_ratio},
          {"acceptance", {{"attempts", attempts}, {"rate", acceptance_rate}}},
          {"missing", missing},
          {"zero_white", zero_white}};
}

StatsReport dataset_stats(const DatasetManifest& m, const std::filesystem::path& root, int workers) {
  StatsReport s;
  s.records = m.records.size();
  s.C = m.C;
  s.M = m.M;
  s.attempts = m.total_attempts;
  s.acceptance_rate = m.acceptance_rate();

  for (const auto& c : m.categories) {
    for (int a = 0; a < 3; ++a) s.base_variance[a].add(c.variance[a]);
    if (!(c.variance[0] > m.config.threshold && c.variance[1] > m.config.threshold &&
          c.variance[2] > m.config.threshold))
      ++s.base_below_threshold;
  }

  std::vector<RecordScan> scans(m.records.size());
  const auto n = static_cast<std::ptrdiff_t>(m.records.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, workers))
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    const auto& r = m.records[static_cast<std::size_t>(j)];
    auto& scan = scans[static_cast<std::size_t>(j)];
    try {
      scan.variance = ifs::axis_variance(pcb::read(root / r.point_cloud_path));
      scan.cloud_ok = true;
    } catch (const std::exception&) {
      scan.missing = std::to_string(j) + ": " + r.point_cloud_path;
    }
    try {
      scan.white = decode_png(read_file(root / r.image_path)).white_count();
      scan.image_ok = true;
    } catch (const std::exception&) {
      if (!scan.missing.empty()) scan.missing += ", ";
      else scan.missing = std::to_string(j) + ": ";
      scan.missing += r.image_path;
    }
  }

  s.category_counts.assign(m.C, 0);
  for (std::size_t j = 0; j < scans.size(); ++j) {
    const auto& scan = scans[j];
    if (!scan.missing.empty()) s.missing.push_back(scan.missing);
    if (scan.cloud_ok)
      for (int a = 0; a < 3; ++a) s.cloud_variance[a].add(scan.variance[a]);
    if (scan.image_ok) {
      s.white_pixels.add(static_cast<double>(scan.white));
      if (scan.white == 0) s.zero_white.push_back(j);
    }
    const int c = m.records[j].category_id;
    if (c >= 0 && static_cast<std::size_t>(c) < m.C) ++s.category_counts[static_cast<std::size_t>(c)];
  }
  for (auto& a : s.base_variance) a.finish();
  for (auto& a : s.cloud_variance) a.finish();
  s.white_pixels.finish();

  if (!s.category_counts.empty()) {
    const auto [lo, hi] = std::minmax_element(s.category_counts.begin(), s.category_counts.end());
    s.balance_ratio = *lo == 0 ? std::numeric_limits<double>::infinity()
                               : static_cast<double>(*hi) / static_cast<double>(*lo);
  }
  return s;
}

}  // namespace vgforge::dataset
