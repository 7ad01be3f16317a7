#include "vgforge/model/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "vgforge/error.hpp"
#include "vgforge/kernels.hpp"
#include "vgforge/rng.hpp"

namespace vgforge::model {

using nlohmann::json;

namespace {

std::string block(int l, const char* name) { return "blocks." + std::to_string(l) + "." + name; }

Matrix uniform_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double a) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-a, a);
  return m;
}

Matrix xavier(Rng& rng, Eigen::Index fan_in, Eigen::Index fan_out) {
  return uniform_matrix(rng, fan_in, fan_out, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)));
}

// Uniform with standard deviation 0.02.
Matrix small_init(Rng& rng, Eigen::Index r, Eigen::Index c) { return uniform_matrix(rng, r, c, 0.02 * std::sqrt(3.0)); }

Matrix zeros(Eigen::Index r, Eigen::Index c) { return Matrix::Zero(r, c); }
Matrix ones(Eigen::Index r, Eigen::Index c) { return Matrix::Ones(r, c); }

}  // namespace

EncoderConfig EncoderConfig::tiny(int classes) {
  EncoderConfig c;
  c.classes = classes;
  return c;
}

EncoderConfig EncoderConfig::small(int classes) {
  EncoderConfig c;
  c.depth = 12;
  c.width = 384;
  c.heads = 6;
  c.classes = classes;
  return c;
}

EncoderConfig EncoderConfig::base(int classes) {
  EncoderConfig c;
  c.depth = 12;
  c.width = 768;
  c.heads = 12;
  c.classes = classes;
  return c;
}

void EncoderConfig::validate() const {
  if (depth < 0) throw InvalidParameter("depth must be >= 0");
  if (width < 1 || heads < 1 || width % heads != 0) throw InvalidParameter("width must be a positive multiple of heads");
  if (mlp_ratio < 1) throw InvalidParameter("mlp_ratio must be >= 1");
  if (patch < 1 || image_size < patch || image_size % patch != 0)
    throw InvalidParameter("image size must be a positive multiple of the patch size");
  if (channels < 1) throw InvalidParameter("channels must be >= 1");
  if (point_patches < 1 || group_size < 1) throw InvalidParameter("point patches and group size must be >= 1");
  if (classes < 1) throw InvalidParameter("classes must be >= 1");
}

json to_json(const EncoderConfig& c) {
  return {{"depth", c.depth},           {"width", c.width},       {"heads", c.heads},
          {"mlp_ratio", c.mlp_ratio},   {"image_size", c.image_size}, {"patch", c.patch},
          {"channels", c.channels},     {"point_patches", c.point_patches}, {"group_size", c.group_size},
          {"classes", c.classes},       {"vgc_head", c.vgc_head}};
}

EncoderConfig encoder_config_from_json(const json& j) {
  EncoderConfig c;
  c.depth = j.at("depth").get<int>();
  c.width = j.at("width").get<int>();
  c.heads = j.at("heads").get<int>();
  c.mlp_ratio = j.at("mlp_ratio").get<int>();
  c.image_size = j.at("image_size").get<int>();
  c.patch = j.at("patch").get<int>();
  c.channels = j.at("channels").get<int>();
  c.point_patches = j.at("point_patches").get<int>();
  c.group_size = j.at("group_size").get<int>();
  c.classes = j.at("classes").get<int>();
  c.vgc_head = j.at("vgc_head").get<bool>();
  c.validate();
  return c;
}

void EncoderParams::add(std::string name, Matrix value) {
  index_[name] = tensors_.size();
  tensors_.push_back({std::move(name), std::move(value)});
}

EncoderParams::EncoderParams(const EncoderConfig& cfg, std::uint64_t init_seed) : cfg_(cfg) {
  cfg.validate();
  Rng rng(derive_seed(init_seed, "encoder-init", 0));
  const Eigen::Index D = cfg.width;
  const Eigen::Index H = static_cast<Eigen::Index>(cfg.width) * cfg.mlp_ratio;
  add("patch_w", xavier(rng, cfg.patch_dim(), D));
  add("patch_b", zeros(1, D));
  add("vis_pos", small_init(rng, cfg.image_tokens(), D));
  add("point_w1", xavier(rng, 3, D));
  add("point_b1", zeros(1, D));
  add("point_w2", xavier(rng, D, D));
  add("point_b2", zeros(1, D));
  add("point_pos_w1", xavier(rng, 3, D));
  add("point_pos_b1", zeros(1, D));
  add("point_pos_w2", xavier(rng, D, D));
  add("point_pos_b2", zeros(1, D));
  add("class_token", small_init(rng, 1, D));
  for (int l = 0; l < cfg.depth; ++l) {
    add(block(l, "ln1_g"), ones(1, D));
    add(block(l, "ln1_b"), zeros(1, D));
    add(block(l, "wq"), xavier(rng, D, D));
    add(block(l, "wk"), xavier(rng, D, D));
    add(block(l, "wv"), xavier(rng, D, D));
    add(block(l, "wo"), xavier(rng, D, D));
    add(block(l, "bo"), zeros(1, D));
    add(block(l, "ln2_g"), ones(1, D));
    add(block(l, "ln2_b"), zeros(1, D));
    add(block(l, "fc1_w"), xavier(rng, D, H));
    add(block(l, "fc1_b"), zeros(1, H));
    add(block(l, "fc2_w"), xavier(rng, H, D));
    add(block(l, "fc2_b"), zeros(1, D));
  }
  add("norm_g", ones(1, D));
  add("norm_b", zeros(1, D));
  add("head_w", zeros(D, cfg.classes));
  add("head_b", zeros(1, cfg.classes));
  if (cfg.vgc_head) {
    add("vgc_w", zeros(D, 2));
    add("vgc_b", zeros(1, 2));
  }
}

EncoderParams EncoderParams::from_tensors(const EncoderConfig& cfg, std::vector<Tensor> tensors) {
  EncoderParams layout(cfg, 0);
  if (tensors.size() != layout.tensors_.size())
    throw InvalidParameter("expected " + std::to_string(layout.tensors_.size()) + " tensors, got " +
                           std::to_string(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& want = layout.tensors_[i];
    const auto& got = tensors[i];
    if (got.name != want.name || got.value.rows() != want.value.rows() || got.value.cols() != want.value.cols())
      throw InvalidParameter("tensor '" + got.name + "' does not match layout entry '" + want.name + "'");
  }
  layout.tensors_ = std::move(tensors);
  return layout;
}

std::size_t EncoderParams::index(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw InvalidParameter("no parameter named '" + name + "'");
  return it->second;
}

std::size_t EncoderParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += static_cast<std::size_t>(t.value.size());
  return n;
}

Gradients zero_gradients(const EncoderParams& p) {
  Gradients g;
  g.reserve(p.tensors().size());
  for (const auto& t : p.tensors()) g.push_back(Matrix::Zero(t.value.rows(), t.value.cols()));
  return g;
}

ImagePatches image_patches(const projection::FractalImage& img, int patch) {
  if (patch < 1 || img.width % patch != 0 || img.height % patch != 0)
    throw InvalidParameter("image " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                           " is not divisible into " + std::to_string(patch) + "x" + std::to_string(patch) +
                           " patches");
  const int pw = img.width / patch;
  const int ph = img.height / patch;
  ImagePatches out;
  out.patches.resize(static_cast<Eigen::Index>(pw) * ph, static_cast<Eigen::Index>(patch) * patch * 3);
  for (int py = 0; py < ph; ++py)
    for (int px = 0; px < pw; ++px) {
      const Eigen::Index r = static_cast<Eigen::Index>(py) * pw + px;
      Eigen::Index c = 0;
      for (int y = 0; y < patch; ++y)
        for (int x = 0; x < patch; ++x) {
          const std::size_t at = (static_cast<std::size_t>(py * patch + y) * static_cast<std::size_t>(img.width) +
                                  static_cast<std::size_t>(px * patch + x)) * 3;
          for (int ch = 0; ch < 3; ++ch) out.patches(r, c++) = img.pixels[at + static_cast<std::size_t>(ch)] / 255.0;
        }
    }
  return out;
}

CloudGroups group_cloud(const PointCloud& pc, int patches, int group_size) {
  if (patches < 1 || group_size < 1) throw InvalidParameter("patch count and group size must be >= 1");
  const auto need = static_cast<std::size_t>(std::max(patches, group_size));
  if (pc.size() < need)
    throw InvalidParameter("cloud has " + std::to_string(pc.size()) + " points, tokenization needs " +
                           std::to_string(need));
  const auto centers = kernels::farthest_point_sample_parallel(pc.points, static_cast<std::size_t>(patches));
  const auto nbrs = kernels::knn_groups_parallel(pc.points, centers, static_cast<std::size_t>(group_size));
  CloudGroups g;
  g.group_size = group_size;
  g.centers.resize(patches, 3);
  g.neighborhoods.resize(static_cast<Eigen::Index>(patches) * group_size, 3);
  for (int i = 0; i < patches; ++i) {
    const Vec3& c = pc.points[centers[static_cast<std::size_t>(i)]];
    for (int a = 0; a < 3; ++a) g.centers(i, a) = c[a];
    for (int k = 0; k < group_size; ++k) {
      const std::size_t at = static_cast<std::size_t>(i) * static_cast<std::size_t>(group_size) + static_cast<std::size_t>(k);
      const Vec3& p = pc.points[nbrs[at]];
      for (int a = 0; a < 3; ++a) g.neighborhoods(static_cast<Eigen::Index>(at), a) = p[a] - c[a];
    }
  }
  return g;
}

Graph::Graph(Tape& tape, const EncoderParams& params, Gradients* grads)
    : tape_(tape), params_(params), grads_(grads), bound_(params.tensors().size(), -1) {}

Var Graph::param(const std::string& name) {
  const std::size_t i = params_.index(name);
  if (bound_[i] < 0) bound_[i] = tape_.param(params_.tensors()[i].value, grads_ ? &(*grads_)[i] : nullptr).id;
  return Var{bound_[i]};
}

Var Graph::linear(Var x, const std::string& w, const std::string& b) {
  return tape_.add_row(tape_.matmul(x, param(w)), param(b));
}

Var Graph::image_tokens(const ImagePatches& x) {
  if (x.patches.cols() != params_.config().patch_dim() || x.patches.rows() != params_.config().image_tokens())
    throw InvalidParameter("image patches do not match the encoder's image size and patch size");
  return tape_.add(linear(tape_.constant(x.patches), "patch_w", "patch_b"), param("vis_pos"));
}

Var Graph::cloud_tokens(const CloudGroups& g) {
  const Var h = tape_.gelu(linear(tape_.constant(g.neighborhoods), "point_w1", "point_b1"));
  const Var feat = tape_.group_max(linear(h, "point_w2", "point_b2"), g.group_size);
  const Var p = tape_.gelu(linear(tape_.constant(g.centers), "point_pos_w1", "point_pos_b1"));
  return tape_.add(feat, linear(p, "point_pos_w2", "point_pos_b2"));
}

Var Graph::sequence(const std::vector<Var>& blocks) {
  std::vector<Var> parts{param("class_token")};
  parts.insert(parts.end(), blocks.begin(), blocks.end());
  return tape_.vstack(parts);
}

Var Graph::encode(Var x) {
  const auto& cfg = params_.config();
  for (int l = 0; l < cfg.depth; ++l) {
    const Var a = tape_.layer_norm(x, param(block(l, "ln1_g")), param(block(l, "ln1_b")));
    const Var att = tape_.attention(tape_.matmul(a, param(block(l, "wq"))), tape_.matmul(a, param(block(l, "wk"))),
                                    tape_.matmul(a, param(block(l, "wv"))), cfg.heads);
    x = tape_.add(x, linear(att, block(l, "wo"), block(l, "bo")));
    const Var b = tape_.layer_norm(x, param(block(l, "ln2_g")), param(block(l, "ln2_b")));
    const Var h = tape_.gelu(linear(b, block(l, "fc1_w"), block(l, "fc1_b")));
    x = tape_.add(x, linear(h, block(l, "fc2_w"), block(l, "fc2_b")));
  }
  return tape_.layer_norm(tape_.row(x, 0), param("norm_g"), param("norm_b"));
}

Var Graph::logits(Var feature) { return linear(feature, "head_w", "head_b"); }

Var Graph::vgc_logits(Var feature) {
  if (!params_.config().vgc_head) throw InvalidParameter("encoder was built without a VGC head");
  return linear(feature, "vgc_w", "vgc_b");
}

TokenSequence tokenize_image(const projection::FractalImage& img, const EncoderParams& params) {
  const auto& cfg = params.config();
  if (img.width != cfg.image_size || img.height != cfg.image_size)
    throw InvalidParameter("image is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                           ", encoder expects " + std::to_string(cfg.image_size));
  Tape tape;
  Graph g(tape, params, nullptr);
  const Var seq = g.sequence({g.image_tokens(image_patches(img, cfg.patch))});
  return {tape.value(seq), Modality::Visual};
}

TokenSequence tokenize_cloud(const PointCloud& pc, const EncoderParams& params) {
  const auto& cfg = params.config();
  Tape tape;
  Graph g(tape, params, nullptr);
  const Var seq = g.sequence({g.cloud_tokens(group_cloud(pc, cfg.point_patches, cfg.group_size))});
  return {tape.value(seq), Modality::Geometric};
}

TokenSequence join(const TokenSequence& image, const TokenSequence& cloud) {
  if (image.tokens.cols() != cloud.tokens.cols()) throw InvalidParameter("token widths differ");
  TokenSequence out;
  out.modality = Modality::Joint;
  out.tokens.resize(image.tokens.rows() + cloud.tokens.rows() - 1, image.tokens.cols());
  out.tokens.topRows(image.tokens.rows()) = image.tokens;
  out.tokens.bottomRows(cloud.tokens.rows() - 1) = cloud.tokens.bottomRows(cloud.tokens.rows() - 1);
  return out;
}

std::vector<double> forward(const TokenSequence& tokens, const EncoderParams& params) {
  if (tokens.tokens.cols() != params.config().width)
    throw InvalidParameter("token width " + std::to_string(tokens.tokens.cols()) + " does not match encoder width " +
                           std::to_string(params.config().width));
  Tape tape;
  Graph g(tape, params, nullptr);
  const Matrix p = softmax_rows(tape.value(g.logits(g.encode(tape.constant(tokens.tokens)))));
  return {p.data(), p.data() + p.size()};
}

}  // namespace vgforge::model
