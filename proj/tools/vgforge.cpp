// vgforge: generate, inspect and verify VG-FractalDB style datasets.
//
// Exit codes: 0 success, 2 invalid flags or parameters, 3 build/verify/I-O failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vgforge/builder.hpp"
#include "vgforge/digest.hpp"
#include "vgforge/error.hpp"
#include "vgforge/image_io.hpp"
#include "vgforge/model/checkpoint.hpp"
#include "vgforge/model/train.hpp"
#include "vgforge/pcb.hpp"
#include "vgforge/shuffle.hpp"
#include "vgforge/stats.hpp"
#include "vgforge/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vgforge;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitFailure = 3;

/// TOML config files as CLI11 reads them, plus JSON objects whose nesting
/// mirrors subcommands: {"generate": {"categories": 10}}.
class TomlOrJsonConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    std::stringstream buf;
    buf << input.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream again(text);
      return CLI::ConfigTOML::from_config(again);
    }
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

  static void flatten(const json& obj, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, v] : obj.items()) {
      if (v.is_object()) {
        auto p = parents;
        p.push_back(key);
        flatten(v, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (v.is_array())
        for (const auto& e : v) item.inputs.push_back(scalar(e));
      else
        item.inputs.push_back(scalar(v));
      out.push_back(std::move(item));
    }
  }
};

struct Failure {
  int code;
  std::string kind;
  std::string message;
};

int report_failure(const Failure& f, bool as_json) {
  if (as_json)
    std::cerr << json{{"error", {{"kind", f.kind}, {"message", f.message}, {"exit_code", f.code}}}}.dump() << "\n";
  else
    std::cerr << "vgforge: " << f.kind << ": " << f.message << "\n";
  return f.code;
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

struct GenerateArgs {
  std::size_t categories = 0;
  std::size_t instances = 0;
  std::uint64_t seed = 0;
  std::string generator = "fractal";
  std::string out;
  int workers = 1;
  double threshold = ifs::kDefaultVarianceThreshold;
  std::size_t points = ifs::kDefaultPoints;
  double mix_ratio = ifs::kDefaultMixRatio;
  int rejection_cap = 1000;
  bool iid = false;
  bool fresh = false;
  std::string name = "vg-fractaldb";
};

int cmd_generate(const GenerateArgs& a) {
  dataset::BuildOptions o;
  o.categories = a.categories;
  o.instances = a.instances;
  o.global_seed = a.seed;
  o.generator = dataset::parse_generator(a.generator);
  o.workers = a.workers;
  o.name = a.name;
  o.resume = !a.fresh;
  o.config.threshold = a.threshold;
  o.config.points = a.points;
  o.config.mix_ratio = a.mix_ratio;
  o.config.rejection_cap = a.rejection_cap;
  o.config.contractive = !a.iid;
  if (!a.out.empty()) {
    o.out_dir = a.out;
  } else if (const char* root = std::getenv("VGFORGE_OUT"); root && *root) {
    o.out_dir = fs::path(root) / (a.generator + "-c" + std::to_string(a.categories) + "-m" +
                                  std::to_string(a.instances) + "-s" + std::to_string(a.seed));
  } else {
    throw InvalidParameter("--out is required when VGFORGE_OUT is not set");
  }
  const auto r = dataset::build_dataset(o);
  std::cout << "manifest: " << r.manifest_path.string() << "\n"
            << "digest: " << r.digest << "\n"
            << "records: " << r.manifest.records.size() << "\n"
            << "acceptance: " << r.manifest.total_attempts << " attempts, rate " << r.manifest.acceptance_rate()
            << "\n";
  if (r.resumed_records) std::cout << "resumed: " << r.resumed_records << "\n";
  return kExitOk;
}

int cmd_render(const fs::path& manifest_path, std::size_t record, const std::string& out) {
  const auto m = dataset::read_manifest(manifest_path);
  if (record >= m.records.size())
    throw InvalidParameter("record " + std::to_string(record) + " out of range (N = " +
                           std::to_string(m.records.size()) + ")");
  const auto& r = m.records[record];
  const auto cloud = dataset::instance_cloud(m, r);
  const auto [img, pose] =
      projection::render_instance(cloud, r.seeds.cam_seed, m.config.projection, m.config.camera_radius);
  const auto png = encode_png(img);
  const fs::path root = manifest_path.parent_path();
  const bool image_same = read_file(root / r.image_path) == png;
  const bool cloud_same = read_file(root / r.point_cloud_path) == pcb::encode(cloud);
  if (!out.empty()) write_file_atomic(out, png);
  std::cout << "record: " << record << " (" << r.category_id << "/" << r.instance_id << ")\n"
            << "white pixels: " << img.white_count() << "\n"
            << "byte-identical: " << (image_same ? "true" : "false") << "\n"
            << "cloud byte-identical: " << (cloud_same ? "true" : "false") << "\n";
  return image_same && cloud_same ? kExitOk : kExitFailure;
}

int cmd_stats(const fs::path& manifest_path, int workers) {
  const auto m = dataset::read_manifest(manifest_path);
  const auto s = dataset::dataset_stats(m, manifest_path.parent_path(), workers);
  print_json(s.to_json());
  return s.missing.empty() ? kExitOk : kExitFailure;
}

int cmd_shuffle(const fs::path& manifest_path, const std::string& mode, std::uint64_t seed) {
  const auto md = dataset::parse_shuffle_mode(mode);
  const auto m = dataset::read_manifest(manifest_path);
  const auto shuffled = dataset::shuffle_labels(m, md, seed);
  const auto path = dataset::shuffled_manifest_path(manifest_path, md, seed);
  dataset::write_manifest(path, shuffled);
  std::cout << "manifest: " << path.string() << "\n"
            << "digest: " << dataset::manifest_digest(shuffled) << "\n";
  return kExitOk;
}

int cmd_verify(const fs::path& manifest_path, const dataset::VerifyOptions& opts, bool as_json) {
  const auto rep = dataset::verify_dataset(manifest_path, opts);
  if (as_json) {
    print_json(rep.to_json());
  } else {
    for (const auto& c : rep.checks) {
      std::cout << (c.ok ? "ok    " : "FAIL  ") << c.name;
      if (!c.ok) std::cout << " (" << c.violations << " violations; first: " << c.first_violation << ")";
      std::cout << "\n";
    }
    std::cout << "manifest digest: " << rep.manifest_digest << "\n"
              << "label stream digest (seed " << opts.label_seed << "): " << rep.label_stream_digest << "\n"
              << (rep.ok() ? "verify: ok" : "verify: FAILED") << "\n";
  }
  return rep.ok() ? kExitOk : kExitFailure;
}

struct TrainArgs {
  std::string manifest;
  std::string preset = "tiny";
  int depth = -1;
  int width = -1;
  int heads = -1;
  std::string objective = "joint";
  bool vgc = false;
  std::string report;
  std::string checkpoint;
};

int cmd_train(TrainArgs a, model::TrainConfig cfg) {
  const fs::path manifest_path = a.manifest;
  const auto m = dataset::read_manifest(manifest_path);
  const int C = static_cast<int>(m.C);
  if (a.preset == "tiny") cfg.encoder = model::EncoderConfig::tiny(C);
  else if (a.preset == "small") cfg.encoder = model::EncoderConfig::small(C);
  else if (a.preset == "base") cfg.encoder = model::EncoderConfig::base(C);
  else throw InvalidParameter("unknown preset '" + a.preset + "' (expected tiny|small|base)");
  if (a.depth >= 0) cfg.encoder.depth = a.depth;
  if (a.width > 0) cfg.encoder.width = a.width;
  if (a.heads > 0) cfg.encoder.heads = a.heads;
  cfg.encoder.image_size = m.config.projection.width;
  cfg.encoder.vgc_head = a.vgc;
  cfg.vgc = a.vgc;
  cfg.objective = model::parse_objective(a.objective);
  cfg.validate();

  model::EncoderParams trained;
  const auto rep = model::train_toy(m, manifest_path.parent_path(), cfg, &trained);
  json out = rep.to_json();
  out["manifest"] = manifest_path.string();
  out["manifest_digest"] = dataset::manifest_digest(m);
  if (!a.report.empty()) {
    const std::string text = out.dump(2) + "\n";
    write_file_atomic(a.report, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  }
  if (!a.checkpoint.empty()) model::save_checkpoint(a.checkpoint, trained);
  const auto& e = rep.last();
  std::cout << "epochs: " << rep.epochs_run << (rep.stopped_early ? " (target reached)" : "") << "\n"
            << "joint accuracy: " << e.joint_accuracy << " loss " << e.joint_loss << "\n"
            << "image accuracy: " << e.image_accuracy << " loss " << e.image_loss << "\n"
            << "cloud accuracy: " << e.cloud_accuracy << " loss " << e.cloud_loss << "\n"
            << "diverged: " << (rep.diverged ? "true" : "false") << "\n"
            << "seconds: " << rep.wall_seconds << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic generator for paired fractal point clouds and images"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<TomlOrJsonConfig>());
  app.set_config("--config", "", "TOML or JSON file with option values");
  bool as_json = false;
  app.add_flag("--json", as_json, "Machine-readable errors on stderr (and JSON verify output)");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Build a dataset");
  g->add_option("-c,--categories", gen.categories, "Category count C")->required()->check(CLI::PositiveNumber);
  g->add_option("-m,--instances", gen.instances, "Instances per category M")->required()->check(CLI::PositiveNumber);
  g->add_option("-s,--seed", gen.seed, "Global seed");
  g->add_option("--generator", gen.generator, "fractal | perlin")->check(CLI::IsMember({"fractal", "perlin"}));
  g->add_option("-o,--out", gen.out, "Output directory (default: $VGFORGE_OUT/<derived name>)");
  g->add_option("-w,--workers", gen.workers, "Worker threads")->check(CLI::PositiveNumber);
  g->add_option("--threshold", gen.threshold, "Per-axis variance threshold")->check(CLI::NonNegativeNumber);
  g->add_option("--points", gen.points, "Points per cloud")->check(CLI::PositiveNumber);
  g->add_option("--mix-ratio", gen.mix_ratio, "FractalNoiseMix ratio in (0, 1)");
  g->add_option("--rejection-cap", gen.rejection_cap, "Attempts per category slot")->check(CLI::PositiveNumber);
  g->add_option("--name", gen.name, "Dataset name");
  g->add_flag("--iid-transforms", gen.iid, "Do not condition transforms on being contractions");
  g->add_flag("--fresh", gen.fresh, "Ignore any build journal in the output directory");

  std::string manifest;
  std::size_t record = 0;
  std::string render_out;
  auto* r = app.add_subcommand("render", "Re-render a record from its seeds and compare bytes");
  r->add_option("manifest", manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  r->add_option("--record", record, "Record index")->required();
  r->add_option("--out", render_out, "Also write the re-rendered PNG here");

  int workers = 1;
  auto* st = app.add_subcommand("stats", "Dataset statistics as JSON");
  st->add_option("manifest", manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  st->add_option("-w,--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  std::string mode;
  std::uint64_t shuffle_seed = 0;
  auto* sh = app.add_subcommand("shuffle", "Write a manifest with permuted point-cloud labels");
  sh->add_option("manifest", manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  sh->add_option("--mode", mode, "category | instance_category")
      ->required()
      ->check(CLI::IsMember({"category", "instance_category"}));
  sh->add_option("--seed", shuffle_seed, "Shuffle seed")->required();

  dataset::VerifyOptions vopts;
  bool no_regen = false;
  auto* v = app.add_subcommand("verify", "Run the property suite against a dataset");
  v->add_option("manifest", manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  v->add_option("-w,--workers", vopts.workers, "Worker threads")->check(CLI::PositiveNumber);
  v->add_option("--label-seed", vopts.label_seed, "Iteration-order seed for the label-stream digest");
  v->add_flag("--no-regenerate", no_regen, "Skip regenerating clouds and images from seeds");

  TrainArgs targs;
  model::TrainConfig tcfg;
  auto* t = app.add_subcommand("train-toy", "Train the tiny unified encoder on a desk-scale build");
  t->add_option("manifest", targs.manifest, "manifest.json")->required()->check(CLI::ExistingFile);
  t->add_option("--preset", targs.preset, "tiny | small | base");
  t->add_option("--depth", targs.depth, "Override encoder depth");
  t->add_option("--width", targs.width, "Override encoder width");
  t->add_option("--heads", targs.heads, "Override attention heads");
  t->add_option("--epochs", tcfg.epochs, "Epochs")->check(CLI::NonNegativeNumber);
  t->add_option("--batch", tcfg.batch_size, "Batch size")->check(CLI::PositiveNumber);
  t->add_option("--lr", tcfg.lr, "Peak learning rate");
  t->add_option("--weight-decay", tcfg.weight_decay, "Decoupled weight decay");
  t->add_option("--warmup", tcfg.warmup_epochs, "Warm-up epochs");
  t->add_option("--smoothing", tcfg.label_smoothing, "Label smoothing");
  t->add_option("--objective", targs.objective, "joint | dual")->check(CLI::IsMember({"joint", "dual"}));
  t->add_flag("--vgc", targs.vgc, "Add the pair-consistency loss");
  t->add_option("--target-accuracy", tcfg.target_accuracy, "Stop once train accuracy reaches this");
  t->add_option("--eval-every", tcfg.eval_every, "Evaluation interval in epochs")->check(CLI::PositiveNumber);
  t->add_option("--seed", tcfg.seed, "Training seed");
  t->add_option("-w,--workers", tcfg.workers, "Worker threads")->check(CLI::PositiveNumber);
  t->add_option("--report", targs.report, "Write the TrainingReport JSON here");
  t->add_option("--checkpoint", targs.checkpoint, "Write trained parameters here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (as_json) return report_failure({kExitUsage, "usage", e.what()}, true);
    app.exit(e);
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*r) return cmd_render(manifest, record, render_out);
    if (*st) return cmd_stats(manifest, workers);
    if (*sh) return cmd_shuffle(manifest, mode, shuffle_seed);
    if (*v) {
      vopts.regenerate = !no_regen;
      return cmd_verify(manifest, vopts, as_json);
    }
    if (*t) return cmd_train(targs, tcfg);
  } catch (const InvalidParameter& e) {
    return report_failure({kExitUsage, "invalid-parameter", e.what()}, as_json);
  } catch (const BuildError& e) {
    return report_failure({kExitFailure, "build-error", e.what()}, as_json);
  } catch (const IoError& e) {
    return report_failure({kExitFailure, "io-error", e.what()}, as_json);
  } catch (const std::exception& e) {
    return report_failure({kExitFailure, "error", e.what()}, as_json);
  }
  return kExitUsage;
}
