#include "vgforge/manifest.hpp"

#include <fstream>
#include <sstream>

#include "vgforge/digest.hpp"
#include "vgforge/error.hpp"
#include "vgforge/image_io.hpp"

namespace vgforge::dataset {

using nlohmann::json;

namespace {

json vec_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

json category_json(const CategoryRecord& c, Generator g) {
  json j{{"id", c.id},
         {"category_seed", c.category_seed},
         {"attempts", c.attempts},
         {"canonical_run_seed", c.canonical_run_seed},
         {"variance", vec_json(c.variance)}};
  if (g == Generator::Perlin) {
    j["frequency"] = c.frequency;
    j["scale"] = c.scale;
  }
  return j;
}

CategoryRecord category_from(const json& j) {
  CategoryRecord c;
  c.id = j.at("id").get<int>();
  c.category_seed = j.at("category_seed").get<std::uint64_t>();
  c.attempts = j.at("attempts").get<int>();
  c.canonical_run_seed = j.at("canonical_run_seed").get<std::uint64_t>();
  c.variance = vec_from(j.at("variance"));
  c.frequency = j.value("frequency", 0.0);
  c.scale = j.value("scale", 0.0);
  return c;
}

json camera_json(const projection::CameraPose& p) {
  return json::array({p.eye[0], p.eye[1], p.eye[2], p.look_at[0], p.look_at[1], p.look_at[2], p.up[0], p.up[1],
                      p.up[2], p.sphere_radius});
}

projection::CameraPose camera_from(const json& j) {
  if (!j.is_array() || j.size() != 10) throw InvalidParameter("manifest: camera must be 10 reals");
  projection::CameraPose p;
  for (int a = 0; a < 3; ++a) {
    p.eye[a] = j[a].get<double>();
    p.look_at[a] = j[3 + a].get<double>();
    p.up[a] = j[6 + a].get<double>();
  }
  p.sphere_radius = j[9].get<double>();
  return p;
}

json record_json(const InstanceRecord& r) {
  return json{{"category_id", r.category_id},
              {"instance_id", r.instance_id},
              {"image_label", r.image_label},
              {"cloud_label", r.cloud_label},
              {"point_cloud_path", r.point_cloud_path},
              {"image_path", r.image_path},
              {"camera", camera_json(r.camera)},
              {"mix_donor_category", r.mix_donor_category ? json(*r.mix_donor_category) : json(nullptr)},
              {"seeds",
               {{"category_seed", r.seeds.category_seed},
                {"run_seed", r.seeds.run_seed},
                {"mix_seed", r.seeds.mix_seed},
                {"cam_seed", r.seeds.cam_seed}}},
              {"pcb_sha256", r.pcb_sha256},
              {"png_sha256", r.png_sha256}};
}

InstanceRecord record_from(const json& j) {
  InstanceRecord r;
  r.category_id = j.at("category_id").get<int>();
  r.instance_id = j.at("instance_id").get<int>();
  r.image_label = j.value("image_label", r.category_id);
  r.cloud_label = j.value("cloud_label", r.category_id);
  r.point_cloud_path = j.at("point_cloud_path").get<std::string>();
  r.image_path = j.at("image_path").get<std::string>();
  r.camera = camera_from(j.at("camera"));
  if (!j.at("mix_donor_category").is_null()) r.mix_donor_category = j["mix_donor_category"].get<int>();
  const auto& s = j.at("seeds");
  r.seeds = {s.at("category_seed").get<std::uint64_t>(), s.at("run_seed").get<std::uint64_t>(),
             s.at("mix_seed").get<std::uint64_t>(), s.at("cam_seed").get<std::uint64_t>()};
  r.pcb_sha256 = j.value("pcb_sha256", "");
  r.png_sha256 = j.value("png_sha256", "");
  return r;
}

}  // namespace

std::string to_string(Generator g) { return g == Generator::Fractal ? "fractal" : "perlin"; }

Generator parse_generator(const std::string& s) {
  if (s == "fractal") return Generator::Fractal;
  if (s == "perlin") return Generator::Perlin;
  throw InvalidParameter("unknown generator '" + s + "' (expected fractal|perlin)");
}

void BuildConfig::validate() const {
  if (points < 1) throw InvalidParameter("points must be >= 1");
  if (!(threshold >= 0.0)) throw InvalidParameter("threshold must be >= 0");
  if (!(mix_ratio > 0.0 && mix_ratio < 1.0)) throw InvalidParameter("mix ratio must lie in (0, 1)");
  if (transforms < 2) throw InvalidParameter("need at least 2 transforms");
  if (rejection_cap < 1) throw InvalidParameter("rejection cap must be >= 1");
  if (reserve_donors < 1) throw InvalidParameter("need at least one reserve donor");
  if (!(camera_radius > 0.0)) throw InvalidParameter("camera radius must be positive");
  if (perlin_grid_w < 2 || perlin_grid_h < 2) throw InvalidParameter("perlin grid must be at least 2x2");
  if (!(perlin_min_scale > 0.0 && perlin_min_scale <= perlin_max_scale))
    throw InvalidParameter("perlin scale range must satisfy 0 < min <= max");
  projection.validate();
}

double DatasetManifest::acceptance_rate() const noexcept {
  const std::size_t accepted = categories.size() + reserve_categories.size();
  return total_attempts == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(total_attempts);
}

const CategoryRecord* DatasetManifest::find_category(int id) const noexcept {
  for (const auto* list : {&categories, &reserve_categories})
    for (const auto& c : *list)
      if (c.id == id) return &c;
  return nullptr;
}

json to_json(const BuildConfig& c) {
  return json{{"points", c.points},
              {"threshold", c.threshold},
              {"mix_ratio", c.mix_ratio},
              {"transforms", c.transforms},
              {"contractive", c.contractive},
              {"rejection_cap", c.rejection_cap},
              {"reserve_donors", c.reserve_donors},
              {"camera_radius", c.camera_radius},
              {"projection",
               {{"fov_y_degrees", c.projection.fov_y_degrees},
                {"aspect", c.projection.aspect},
                {"near", c.projection.near},
                {"far", c.projection.far},
                {"width", c.projection.width},
                {"height", c.projection.height}}},
              {"perlin",
               {{"grid_w", c.perlin_grid_w},
                {"grid_h", c.perlin_grid_h},
                {"min_scale", c.perlin_min_scale},
                {"max_scale", c.perlin_max_scale}}}};
}

BuildConfig build_config_from_json(const json& j) {
  BuildConfig c;
  c.points = j.at("points").get<std::size_t>();
  c.threshold = j.at("threshold").get<double>();
  c.mix_ratio = j.at("mix_ratio").get<double>();
  c.transforms = j.at("transforms").get<std::size_t>();
  c.contractive = j.at("contractive").get<bool>();
  c.rejection_cap = j.at("rejection_cap").get<int>();
  c.reserve_donors = j.at("reserve_donors").get<std::size_t>();
  c.camera_radius = j.at("camera_radius").get<double>();
  const auto& p = j.at("projection");
  c.projection.fov_y_degrees = p.at("fov_y_degrees").get<double>();
  c.projection.aspect = p.at("aspect").get<double>();
  c.projection.near = p.at("near").get<double>();
  c.projection.far = p.at("far").get<double>();
  c.projection.width = p.at("width").get<int>();
  c.projection.height = p.at("height").get<int>();
  const auto& q = j.at("perlin");
  c.perlin_grid_w = q.at("grid_w").get<int>();
  c.perlin_grid_h = q.at("grid_h").get<int>();
  c.perlin_min_scale = q.at("min_scale").get<double>();
  c.perlin_max_scale = q.at("max_scale").get<double>();
  return c;
}

json to_json(const DatasetManifest& m) {
  json cats = json::array();
  for (const auto& c : m.categories) cats.push_back(category_json(c, m.generator));
  json reserve = json::array();
  for (const auto& c : m.reserve_categories) reserve.push_back(category_json(c, m.generator));
  json records = json::array();
  for (const auto& r : m.records) records.push_back(record_json(r));

  const std::size_t accepted = m.categories.size() + m.reserve_categories.size();
  json j{{"format_version", m.format_version},
         {"name", m.name},
         {"C", m.C},
         {"M", m.M},
         {"N", m.N()},
         {"generator", to_string(m.generator)},
         {"global_seed", m.global_seed},
         {"config", to_json(m.config)},
         {"acceptance", {{"attempts", m.total_attempts}, {"accepted", accepted}, {"rate", m.acceptance_rate()}}},
         {"categories", std::move(cats)},
         {"reserve_categories", std::move(reserve)},
         {"records", std::move(records)}};
  if (m.shuffle) j["shuffle"] = {{"mode", m.shuffle->mode}, {"seed", m.shuffle->seed}};
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  try {
    DatasetManifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != kFormatVersion)
      throw InvalidParameter("unsupported manifest format_version " + std::to_string(m.format_version));
    m.name = j.at("name").get<std::string>();
    m.C = j.at("C").get<std::size_t>();
    m.M = j.at("M").get<std::size_t>();
    m.generator = parse_generator(j.at("generator").get<std::string>());
    m.global_seed = j.at("global_seed").get<std::uint64_t>();
    m.config = build_config_from_json(j.at("config"));
    m.total_attempts = j.at("acceptance").at("attempts").get<std::uint64_t>();
    for (const auto& c : j.at("categories")) m.categories.push_back(category_from(c));
    for (const auto& c : j.at("reserve_categories")) m.reserve_categories.push_back(category_from(c));
    for (const auto& r : j.at("records")) m.records.push_back(record_from(r));
    if (j.contains("shuffle"))
      m.shuffle = ShuffleInfo{j["shuffle"].at("mode").get<std::string>(), j["shuffle"].at("seed").get<std::uint64_t>()};
    return m;
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("malformed manifest: ") + e.what());
  }
}

std::string serialize(const DatasetManifest& m) { return to_json(m).dump(2) + "\n"; }

std::string manifest_digest(const DatasetManifest& m) { return sha256_hex(serialize(m)); }

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  const std::string text = serialize(m);
  write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("cannot parse manifest " + path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

}  // namespace vgforge::dataset
