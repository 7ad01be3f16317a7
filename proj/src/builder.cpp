#include "vgforge/builder.hpp"

#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "vgforge/digest.hpp"
#include "vgforge/error.hpp"
#include "vgforge/image_io.hpp"
#include "vgforge/pcb.hpp"
#include "vgforge/perlin.hpp"
#include "vgforge/rng.hpp"

namespace vgforge::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

namespace seeds {
std::uint64_t category_attempt(std::uint64_t global, bool reserve, std::size_t slot, int attempt) {
  return derive_seed(global, reserve ? "reserve-category" : "category", slot, static_cast<std::uint64_t>(attempt));
}
std::uint64_t canonical_run(std::uint64_t category_seed) { return derive_seed(category_seed, "canonical", 0); }
std::uint64_t instance_run(std::uint64_t global, int category, int instance, int retry) {
  const std::uint64_t base = derive_seed(global, "run", static_cast<std::uint64_t>(category),
                                         static_cast<std::uint64_t>(instance));
  return retry == 0 ? base : derive_seed(base, "retry", static_cast<std::uint64_t>(retry));
}
std::uint64_t mix(std::uint64_t global, int category, int instance) {
  return derive_seed(global, "mix", static_cast<std::uint64_t>(category), static_cast<std::uint64_t>(instance));
}
std::uint64_t camera(std::uint64_t global, int category, int instance) {
  return derive_seed(global, "camera", static_cast<std::uint64_t>(category), static_cast<std::uint64_t>(instance));
}
std::uint64_t donor(std::uint64_t global, int category, int instance) {
  return derive_seed(global, "donor", static_cast<std::uint64_t>(category), static_cast<std::uint64_t>(instance));
}
}  // namespace seeds

namespace {

constexpr int kInstanceRetries = 16;
constexpr const char* kJournalName = "build.journal";

/// Runs body(i) for i in [0, n) on `workers` threads; rethrows the
/// lowest-index failure so error reporting is worker-count independent.
template <class Body>
void parallel_for_each(std::size_t n, int workers, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::ptrdiff_t s = 0; s < count; ++s) {
    const auto i = static_cast<std::size_t>(s);
    try {
      body(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct JournalEntry {
  std::uint64_t run_seed = 0;
  std::string pcb_sha256;
  std::string png_sha256;
};

using JournalMap = std::map<std::pair<int, int>, JournalEntry>;

JournalMap load_journal(const fs::path& path, const std::string& build_id) {
  JournalMap done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  if (!std::getline(in, line)) return done;
  try {
    if (json::parse(line).value("build_id", "") != build_id) return done;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json j = json::parse(line);
      done[{j.at("c").get<int>(), j.at("i").get<int>()}] = {
          j.at("run_seed").get<std::uint64_t>(), j.at("pcb").get<std::string>(), j.at("png").get<std::string>()};
    }
  } catch (const json::exception&) {
    // a torn final line from an interrupted write; keep what parsed
  }
  return done;
}

bool file_matches(const fs::path& path, const std::string& sha) {
  std::error_code ec;
  if (!fs::exists(path, ec)) return false;
  try {
    return sha256_file(path) == sha;
  } catch (const IoError&) {
    return false;
  }
}

std::string join_rate(std::uint64_t accepted, std::uint64_t attempts) {
  std::ostringstream s;
  s << accepted << "/" << attempts << " = "
    << (attempts ? static_cast<double>(accepted) / static_cast<double>(attempts) : 0.0);
  return s.str();
}

}  // namespace

std::string cloud_relpath(int category, int instance) {
  return "clouds/" + std::to_string(category) + "/" + std::to_string(instance) + ".pcb";
}

std::string image_relpath(int category, int instance) {
  return "images/" + std::to_string(category) + "/" + std::to_string(instance) + ".png";
}

PointCloud base_cloud(Generator g, const BuildConfig& cfg, const CategoryRecord& cat, std::uint64_t run_seed) {
  if (g == Generator::Fractal) {
    const auto params = ifs::sample_ifs(cat.category_seed, cfg.transforms, cfg.contractive);
    return ifs::normalize_cloud(ifs::chaos_game(params, cfg.points, run_seed));
  }
  perlin::PerlinParams params;
  params.grid_w = cfg.perlin_grid_w;
  params.grid_h = cfg.perlin_grid_h;
  params.frequency = cat.frequency;
  params.scale = cat.scale;
  params.category_seed = cat.category_seed;
  return perlin::lift_to_cloud(perlin::perlin_2d(params), params, cfg.points, run_seed);
}

CategorySearch search_category(Generator g, const BuildConfig& cfg, std::uint64_t global_seed, bool reserve,
                               std::size_t slot, int id, std::size_t grid_categories) {
  const perlin::CategoryGrid grid{grid_categories, cfg.perlin_min_scale, cfg.perlin_max_scale};
  for (int attempt = 0; attempt < cfg.rejection_cap; ++attempt) {
    CategoryRecord rec;
    rec.id = id;
    rec.category_seed = seeds::category_attempt(global_seed, reserve, slot, attempt);
    rec.attempts = attempt + 1;
    rec.canonical_run_seed = seeds::canonical_run(rec.category_seed);
    if (g == Generator::Perlin) std::tie(rec.frequency, rec.scale) = grid.frequency_scale(static_cast<std::size_t>(id));
    PointCloud pc;
    try {
      pc = base_cloud(g, cfg, rec, rec.canonical_run_seed);
    } catch (const DivergenceError&) {
      continue;
    }
    if (ifs::variance_filter(pc, cfg.threshold)) {
      rec.variance = ifs::axis_variance(pc);
      return {rec, std::move(pc)};
    }
  }
  throw BuildError("category " + std::to_string(id) + ": rejection cap of " + std::to_string(cfg.rejection_cap) +
                   " attempts exceeded");
}

PointCloud instance_cloud(const DatasetManifest& m, const InstanceRecord& r) {
  const CategoryRecord* cat = m.find_category(r.category_id);
  if (!cat) throw InvalidParameter("record references unknown category " + std::to_string(r.category_id));
  const PointCloud base = base_cloud(m.generator, m.config, *cat, r.seeds.run_seed);
  if (!r.mix_donor_category) return base;
  const CategoryRecord* donor = m.find_category(*r.mix_donor_category);
  if (!donor) throw InvalidParameter("record references unknown donor " + std::to_string(*r.mix_donor_category));
  const PointCloud donor_cloud = base_cloud(m.generator, m.config, *donor, donor->canonical_run_seed);
  return ifs::fractal_noise_mix(base, donor_cloud, m.config.mix_ratio, r.seeds.mix_seed);
}

std::pair<projection::FractalImage, projection::CameraPose> render_record(const DatasetManifest& m,
                                                                          const InstanceRecord& r) {
  return projection::render_instance(instance_cloud(m, r), r.seeds.cam_seed, m.config.projection,
                                     m.config.camera_radius);
}

BuildResult build_dataset(const BuildOptions& o) {
  if (o.categories < 1) throw InvalidParameter("categories must be >= 1");
  if (o.instances < 1) throw InvalidParameter("instances must be >= 1");
  if (o.workers < 1) throw InvalidParameter("workers must be >= 1");
  if (o.out_dir.empty()) throw InvalidParameter("output directory is required");
  o.config.validate();

  std::error_code ec;
  fs::create_directories(o.out_dir, ec);
  if (ec || !fs::is_directory(o.out_dir)) throw IoError("cannot create output directory " + o.out_dir.string());

  const auto& cfg = o.config;
  const std::size_t C = o.categories;
  const std::size_t M = o.instances;
  const std::uint64_t global = o.global_seed;

  DatasetManifest m;
  m.name = o.name;
  m.C = C;
  m.M = M;
  m.generator = o.generator;
  m.global_seed = global;
  m.config = cfg;

  // Category search. Slots are independent; a slot's seeds depend only on its index.
  const std::size_t reserve_count = C < 2 ? cfg.reserve_donors : 0;
  const std::size_t grid_size = C + reserve_count;
  std::vector<CategorySearch> found(C + reserve_count);
  std::vector<char> failed(found.size(), 0);
  parallel_for_each(found.size(), o.workers, [&](std::size_t k) {
    const bool reserve = k >= C;
    const std::size_t slot = reserve ? k - C : k;
    try {
      found[k] = search_category(o.generator, cfg, global, reserve, slot, static_cast<int>(k), grid_size);
    } catch (const BuildError&) {
      failed[k] = 1;
      found[k].record.attempts = cfg.rejection_cap;
    }
  });
  std::uint64_t attempts = 0;
  std::uint64_t accepted = 0;
  for (std::size_t k = 0; k < found.size(); ++k) {
    attempts += static_cast<std::uint64_t>(found[k].record.attempts);
    accepted += failed[k] ? 0 : 1;
  }
  for (std::size_t k = 0; k < found.size(); ++k)
    if (failed[k])
      throw BuildError("category slot " + std::to_string(k) + " exceeded the rejection cap of " +
                       std::to_string(cfg.rejection_cap) + " attempts; acceptance rate " +
                       join_rate(accepted, attempts));
  m.total_attempts = attempts;
  for (std::size_t k = 0; k < found.size(); ++k)
    (k < C ? m.categories : m.reserve_categories).push_back(found[k].record);

  // Journal: one header line identifying the build, then one line per finished record.
  const json identity{{"name", o.name},      {"C", C},
                      {"M", M},              {"global_seed", global},
                      {"generator", to_string(o.generator)}, {"config", to_json(cfg)}};
  const std::string build_id = sha256_hex(identity.dump());
  const fs::path journal_path = o.out_dir / kJournalName;
  JournalMap done = o.resume ? load_journal(journal_path, build_id) : JournalMap{};
  std::ofstream journal;
  if (done.empty()) {
    journal.open(journal_path, std::ios::trunc);
    journal << json{{"build_id", build_id}}.dump() << "\n" << std::flush;
  } else {
    journal.open(journal_path, std::ios::app);
  }
  if (!journal) throw IoError("cannot open journal " + journal_path.string());
  std::mutex journal_mutex;

  const std::size_t N = C * M;
  m.records.resize(N);
  std::vector<char> resumed(N, 0);
  parallel_for_each(N, o.workers, [&](std::size_t idx) {
    const int c = static_cast<int>(idx / M);
    const int i = static_cast<int>(idx % M);
    InstanceRecord& r = m.records[idx];
    r.category_id = c;
    r.instance_id = i;
    r.image_label = c;
    r.cloud_label = c;
    r.point_cloud_path = cloud_relpath(c, i);
    r.image_path = image_relpath(c, i);
    r.seeds.category_seed = m.categories[static_cast<std::size_t>(c)].category_seed;
    r.seeds.mix_seed = seeds::mix(global, c, i);
    r.seeds.cam_seed = seeds::camera(global, c, i);

    Rng donor_rng(seeds::donor(global, c, i));
    if (C >= 2) {
      auto d = static_cast<int>(donor_rng.below(C - 1));
      r.mix_donor_category = d >= c ? d + 1 : d;
    } else {
      r.mix_donor_category = static_cast<int>(C + donor_rng.below(reserve_count));
    }

    const fs::path cloud_file = o.out_dir / r.point_cloud_path;
    const fs::path image_file = o.out_dir / r.image_path;
    if (auto it = done.find({c, i}); it != done.end() && file_matches(cloud_file, it->second.pcb_sha256) &&
                                     file_matches(image_file, it->second.png_sha256)) {
      r.seeds.run_seed = it->second.run_seed;
      r.pcb_sha256 = it->second.pcb_sha256;
      r.png_sha256 = it->second.png_sha256;
      r.camera = projection::sample_camera({0.0, 0.0, 0.0}, cfg.camera_radius, r.seeds.cam_seed);
      resumed[idx] = 1;
      return;
    }

    const CategoryRecord& cat = m.categories[static_cast<std::size_t>(c)];
    PointCloud base;
    bool ok = false;
    for (int retry = 0; retry < kInstanceRetries && !ok; ++retry) {
      r.seeds.run_seed = seeds::instance_run(global, c, i, retry);
      try {
        base = base_cloud(o.generator, cfg, cat, r.seeds.run_seed);
        ok = true;
      } catch (const DivergenceError&) {
      }
    }
    if (!ok) throw BuildError("instance " + std::to_string(c) + "/" + std::to_string(i) + " diverged on every retry");

    const PointCloud& donor = found[static_cast<std::size_t>(*r.mix_donor_category)].canonical;
    const PointCloud mixed = ifs::fractal_noise_mix(base, donor, cfg.mix_ratio, r.seeds.mix_seed);
    auto [image, pose] = projection::render_instance(mixed, r.seeds.cam_seed, cfg.projection, cfg.camera_radius);
    r.camera = pose;

    const auto cloud_bytes = pcb::encode(mixed);
    const auto image_bytes = encode_png(image);
    r.pcb_sha256 = sha256_hex(cloud_bytes);
    r.png_sha256 = sha256_hex(image_bytes);
    write_file_atomic(cloud_file, cloud_bytes);
    write_file_atomic(image_file, image_bytes);

    const std::string line = json{{"c", c}, {"i", i}, {"run_seed", r.seeds.run_seed},
                                  {"pcb", r.pcb_sha256}, {"png", r.png_sha256}}.dump();
    std::lock_guard lock(journal_mutex);
    journal << line << "\n" << std::flush;
  });

  BuildResult result;
  result.manifest_path = o.out_dir / "manifest.json";
  write_manifest(result.manifest_path, m);
  journal.close();
  fs::remove(journal_path, ec);
  result.digest = manifest_digest(m);
  for (char r : resumed) result.resumed_records += r ? 1 : 0;
  result.manifest = std::move(m);
  return result;
}

}  // namespace vgforge::dataset
