#include "vgforge/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

#include "vgforge/builder.hpp"
#include "vgforge/digest.hpp"
#include "vgforge/error.hpp"
#include "vgforge/image_io.hpp"
#include "vgforge/pcb.hpp"
#include "vgforge/rng.hpp"
#include "vgforge/shuffle.hpp"

namespace vgforge::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kRetryWindow = 16;

class Suite {
 public:
  Check& check(const std::string& name) {
    for (auto& c : checks_)
      if (c.name == name) return c;
    checks_.push_back(Check{name, true, 0, {}});
    return checks_.back();
  }

  void expect(const std::string& name, bool cond, const std::function<std::string()>& what) {
    Check& c = check(name);
    if (cond) return;
    c.ok = false;
    if (c.violations++ == 0) c.first_violation = what();
  }

  std::vector<Check> take() { return std::move(checks_); }

 private:
  std::vector<Check> checks_;
};

std::string rec_name(std::size_t j, const InstanceRecord& r) {
  return "record " + std::to_string(j) + " (" + std::to_string(r.category_id) + "/" + std::to_string(r.instance_id) +
         ")";
}

double dist(const Vec3& a, const Vec3& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

bool pose_equal(const projection::CameraPose& a, const projection::CameraPose& b) {
  return a.eye == b.eye && a.look_at == b.look_at && a.up == b.up && a.sphere_radius == b.sphere_radius;
}

struct FileScan {
  std::string cloud_error;
  std::string image_error;
  std::string regen_error;
  std::size_t white = 0;
};

}  // namespace

bool VerifyReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
}

json VerifyReport::to_json() const {
  json cs = json::array();
  for (const auto& c : checks) {
    json j{{"name", c.name}, {"ok", c.ok}, {"violations", c.violations}};
    if (!c.ok) j["first_violation"] = c.first_violation;
    cs.push_back(std::move(j));
  }
  return {{"ok", ok()}, {"manifest_digest", manifest_digest}, {"label_stream_digest", label_stream_digest},
          {"checks", std::move(cs)}};
}

std::vector<std::size_t> iteration_order(std::size_t n, std::uint64_t seed) {
  std::vector<std::pair<std::uint64_t, std::size_t>> keyed(n);
  for (std::size_t i = 0; i < n; ++i) keyed[i] = {mix64(seed + 0x9E3779B97F4A7C15ULL * (i + 1)), i};
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = keyed[i].second;
  return order;
}

std::string label_stream_digest(const DatasetManifest& m, std::uint64_t seed) {
  std::string text;
  for (std::size_t j : iteration_order(m.records.size(), seed)) text += std::to_string(m.records[j].category_id) + "\n";
  return sha256_hex(text);
}

VerifyReport verify_dataset(const fs::path& manifest_path, const VerifyOptions& opts) {
  const DatasetManifest m = read_manifest(manifest_path);
  const fs::path root = manifest_path.parent_path();
  VerifyReport report;
  report.manifest_digest = manifest_digest(m);
  report.label_stream_digest = label_stream_digest(m, opts.label_seed);
  Suite s;

  {
    const auto bytes = read_file(manifest_path);
    s.expect("manifest_canonical", std::string(bytes.begin(), bytes.end()) == serialize(m),
             [] { return std::string("manifest text differs from its canonical serialization"); });
  }

  // Structure
  s.expect("record_count", m.records.size() == m.N(), [&] {
    return "N = " + std::to_string(m.N()) + " but " + std::to_string(m.records.size()) + " records";
  });
  s.expect("category_count", m.categories.size() == m.C, [&] {
    return std::to_string(m.categories.size()) + " accepted categories for C = " + std::to_string(m.C);
  });
  std::set<std::pair<int, int>> seen;
  std::vector<std::size_t> histogram(m.C, 0);
  for (std::size_t j = 0; j < m.records.size(); ++j) {
    const auto& r = m.records[j];
    const bool in_range = r.category_id >= 0 && static_cast<std::size_t>(r.category_id) < m.C && r.instance_id >= 0 &&
                          static_cast<std::size_t>(r.instance_id) < m.M;
    s.expect("record_ids", in_range, [&] { return rec_name(j, r) + " out of range"; });
    s.expect("record_unique", seen.insert({r.category_id, r.instance_id}).second,
             [&] { return rec_name(j, r) + " duplicated"; });
    if (in_range) ++histogram[static_cast<std::size_t>(r.category_id)];
  }
  for (std::size_t c = 0; c < m.C; ++c)
    s.expect("category_histogram", histogram[c] == m.M, [&] {
      return "category " + std::to_string(c) + " has " + std::to_string(histogram[c]) + " records";
    });

  // Labels
  DatasetManifest restored = m;
  if (m.shuffle) {
    try {
      restored = restore_labels(m);
    } catch (const InvalidParameter& e) {
      s.expect("shuffle_reversible", false, [&] { return std::string(e.what()); });
    }
  }
  for (std::size_t j = 0; j < m.records.size(); ++j) {
    const auto& r = m.records[j];
    s.expect("label_consistency", r.image_label == r.category_id && restored.records[j].cloud_label == r.category_id,
             [&] {
               return rec_name(j, r) + " image_label " + std::to_string(r.image_label) + " cloud_label " +
                      std::to_string(restored.records[j].cloud_label);
             });
  }

  // Categories
  for (const auto& c : m.categories) {
    s.expect("category_variance",
             c.variance[0] > m.config.threshold && c.variance[1] > m.config.threshold &&
                 c.variance[2] > m.config.threshold,
             [&] { return "category " + std::to_string(c.id) + " variance below threshold"; });
  }
  std::vector<const CategoryRecord*> all_cats;
  for (const auto* list : {&m.categories, &m.reserve_categories})
    for (const auto& c : *list) all_cats.push_back(&c);
  std::vector<std::string> cat_errors(all_cats.size());
  const auto ncat = static_cast<std::ptrdiff_t>(all_cats.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, opts.workers))
  for (std::ptrdiff_t k = 0; k < ncat; ++k) {
    const CategoryRecord& c = *all_cats[static_cast<std::size_t>(k)];
    std::string& err = cat_errors[static_cast<std::size_t>(k)];
    try {
      if (m.generator == Generator::Fractal) {
        const auto params = ifs::sample_ifs(c.category_seed, m.config.transforms, m.config.contractive);
        const double total = std::accumulate(params.probs.begin(), params.probs.end(), 0.0);
        if (std::abs(total - 1.0) > 1e-9) err = "probabilities sum to " + std::to_string(total);
      }
      const PointCloud pc = base_cloud(m.generator, m.config, c, c.canonical_run_seed);
      if (ifs::axis_variance(pc) != c.variance) err += "recorded variance does not match regenerated cloud; ";
      if (!ifs::variance_filter(pc, m.config.threshold)) err += "regenerated cloud fails the variance filter";
    } catch (const std::exception& e) {
      err = e.what();
    }
  }
  for (std::size_t k = 0; k < all_cats.size(); ++k)
    s.expect("category_regenerates", cat_errors[k].empty(),
             [&] { return "category " + std::to_string(all_cats[k]->id) + ": " + cat_errors[k]; });

  // Seeds, donors, cameras
  for (std::size_t j = 0; j < m.records.size(); ++j) {
    const auto& r = m.records[j];
    const CategoryRecord* cat = m.find_category(r.category_id);
    bool run_ok = false;
    for (int retry = 0; retry < kRetryWindow && !run_ok; ++retry)
      run_ok = r.seeds.run_seed == seeds::instance_run(m.global_seed, r.category_id, r.instance_id, retry);
    s.expect("record_seeds",
             cat && r.seeds.category_seed == cat->category_seed && run_ok &&
                 r.seeds.mix_seed == seeds::mix(m.global_seed, r.category_id, r.instance_id) &&
                 r.seeds.cam_seed == seeds::camera(m.global_seed, r.category_id, r.instance_id),
             [&] { return rec_name(j, r) + " seeds are not the derived seeds"; });
    const bool donor_ok = r.mix_donor_category && *r.mix_donor_category != r.category_id &&
                          m.find_category(*r.mix_donor_category) != nullptr;
    s.expect("mix_donor", donor_ok, [&] { return rec_name(j, r) + " has no valid donor category"; });
    s.expect("camera_on_sphere",
             std::abs(dist(r.camera.eye, r.camera.look_at) - r.camera.sphere_radius) <= 1e-6 &&
                 r.camera.sphere_radius == m.config.camera_radius,
             [&] { return rec_name(j, r) + " camera is off its sphere"; });
    s.expect("camera_from_seed",
             pose_equal(r.camera,
                        projection::sample_camera({0.0, 0.0, 0.0}, m.config.camera_radius, r.seeds.cam_seed)),
             [&] { return rec_name(j, r) + " camera differs from sample_camera(cam_seed)"; });
  }

  // Files
  std::vector<FileScan> scans(m.records.size());
  const auto n = static_cast<std::ptrdiff_t>(m.records.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, opts.workers))
  for (std::ptrdiff_t sj = 0; sj < n; ++sj) {
    const auto j = static_cast<std::size_t>(sj);
    const auto& r = m.records[j];
    auto& scan = scans[j];
    std::vector<std::uint8_t> cloud_bytes;
    std::vector<std::uint8_t> image_bytes;
    try {
      cloud_bytes = read_file(root / r.point_cloud_path);
      const PointCloud pc = pcb::decode(cloud_bytes);
      if (pc.size() != m.config.points) scan.cloud_error = "point count " + std::to_string(pc.size());
      for (const auto& p : pc.points)
        if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) scan.cloud_error = "non-finite point";
      if (sha256_hex(cloud_bytes) != r.pcb_sha256) scan.cloud_error += " sha256 mismatch";
    } catch (const std::exception& e) {
      scan.cloud_error = e.what();
    }
    try {
      image_bytes = read_file(root / r.image_path);
      const auto img = decode_png(image_bytes);
      if (img.width != m.config.projection.width || img.height != m.config.projection.height)
        scan.image_error = "image is " + std::to_string(img.width) + "x" + std::to_string(img.height);
      for (auto v : img.pixels)
        if (v != 0 && v != 255) {
          scan.image_error = "pixel value outside {0, 255}";
          break;
        }
      scan.white = img.white_count();
      if (sha256_hex(image_bytes) != r.png_sha256) scan.image_error += " sha256 mismatch";
    } catch (const std::exception& e) {
      scan.image_error = e.what();
      scan.white = 1;
    }
    if (opts.regenerate) {
      try {
        const PointCloud pc = instance_cloud(m, r);
        const auto [img, pose] =
            projection::render_instance(pc, r.seeds.cam_seed, m.config.projection, m.config.camera_radius);
        if (sha256_hex(pcb::encode(pc)) != r.pcb_sha256) scan.regen_error = "regenerated cloud differs; ";
        if (sha256_hex(encode_png(img)) != r.png_sha256) scan.regen_error += "regenerated image differs";
      } catch (const std::exception& e) {
        scan.regen_error = e.what();
      }
    }
  }
  for (std::size_t j = 0; j < scans.size(); ++j) {
    const auto& r = m.records[j];
    s.expect("cloud_file", scans[j].cloud_error.empty(),
             [&] { return rec_name(j, r) + " " + r.point_cloud_path + ": " + scans[j].cloud_error; });
    s.expect("image_file", scans[j].image_error.empty(),
             [&] { return rec_name(j, r) + " " + r.image_path + ": " + scans[j].image_error; });
    s.expect("image_nonempty", scans[j].white > 0, [&] { return rec_name(j, r) + " image has no white pixel"; });
    if (opts.regenerate)
      s.expect("reproducible_from_seeds", scans[j].regen_error.empty(),
               [&] { return rec_name(j, r) + ": " + scans[j].regen_error; });
  }

  report.checks = s.take();
  return report;
}

}  // namespace vgforge::dataset
