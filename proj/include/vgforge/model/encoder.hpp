#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "vgforge/ifs.hpp"
#include "vgforge/model/tape.hpp"
#include "vgforge/projection.hpp"

namespace vgforge::model {

struct EncoderConfig {
  int depth = 4;
  int width = 64;
  int heads = 4;
  int mlp_ratio = 4;
  int image_size = 224;
  int patch = 16;
  int channels = 3;
  int point_patches = 64;
  int group_size = 32;
  int classes = 10;
  bool vgc_head = false;

  static EncoderConfig tiny(int classes);   // depth 4, D 64, 4 heads
  static EncoderConfig small(int classes);  // depth 12, D 384, 6 heads
  static EncoderConfig base(int classes);   // depth 12, D 768, 12 heads

  int image_tokens() const { return (image_size / patch) * (image_size / patch); }
  int patch_dim() const { return patch * patch * channels; }
  void validate() const;
};

nlohmann::json to_json(const EncoderConfig& c);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

struct Tensor {
  std::string name;
  Matrix value;
};

/// All learnable tensors by name. The class token and classifier head exist
/// once and are referenced by every modality path.
class EncoderParams {
 public:
  EncoderParams() = default;
  EncoderParams(const EncoderConfig& cfg, std::uint64_t init_seed);

  const EncoderConfig& config() const noexcept { return cfg_; }
  std::vector<Tensor>& tensors() noexcept { return tensors_; }
  const std::vector<Tensor>& tensors() const noexcept { return tensors_; }

  std::size_t index(const std::string& name) const;
  Matrix& at(const std::string& name) { return tensors_[index(name)].value; }
  const Matrix& at(const std::string& name) const { return tensors_[index(name)].value; }
  std::size_t scalar_count() const;

  /// Used by checkpoint loading; tensor list must match the config's layout.
  static EncoderParams from_tensors(const EncoderConfig& cfg, std::vector<Tensor> tensors);

 private:
  void add(std::string name, Matrix value);

  EncoderConfig cfg_;
  std::vector<Tensor> tensors_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// One gradient matrix per tensor, same order and shapes.
using Gradients = std::vector<Matrix>;
Gradients zero_gradients(const EncoderParams& p);

/// Flattened non-overlapping patches (row-major patch order; pixels row-major,
/// channels interleaved), scaled to [0, 1]. Independent of parameters.
struct ImagePatches {
  Matrix patches;  // patch count x patch_dim
};

/// FPS centers and their kNN neighborhoods re-centered on each center.
struct CloudGroups {
  Matrix centers;        // G x 3
  Matrix neighborhoods;  // (G * K) x 3, group-major
  int group_size = 0;
};

/// Throws InvalidParameter unless both image dimensions divide by `patch`.
ImagePatches image_patches(const projection::FractalImage& img, int patch);

/// Throws InvalidParameter when the cloud has fewer than max(patches, group_size) points.
CloudGroups group_cloud(const PointCloud& pc, int patches, int group_size);

enum class Modality { Visual, Geometric, Joint };

/// Token matrix including the leading class token.
struct TokenSequence {
  Matrix tokens;
  Modality modality = Modality::Visual;
};

/// Builds the encoder graph on a tape. Each parameter is bound at most once
/// per tape so shared tensors accumulate one gradient.
class Graph {
 public:
  /// With `grads` null nothing is differentiated.
  Graph(Tape& tape, const EncoderParams& params, Gradients* grads);

  Var param(const std::string& name);
  Var image_tokens(const ImagePatches& x);  // patch tokens, no class token
  Var cloud_tokens(const CloudGroups& g);   // group tokens, no class token
  /// Shared class token followed by the given token blocks.
  Var sequence(const std::vector<Var>& blocks);
  /// Encoder blocks and final norm; returns the class-token feature (1 x D).
  Var encode(Var seq);
  Var logits(Var feature);      // 1 x classes
  Var vgc_logits(Var feature);  // 1 x 2

  Tape& tape() noexcept { return tape_; }

 private:
  Var linear(Var x, const std::string& w, const std::string& b);

  Tape& tape_;
  const EncoderParams& params_;
  Gradients* grads_;
  std::vector<int> bound_;
};

TokenSequence tokenize_image(const projection::FractalImage& img, const EncoderParams& params);
TokenSequence tokenize_cloud(const PointCloud& pc, const EncoderParams& params);
TokenSequence join(const TokenSequence& image, const TokenSequence& cloud);

/// Class probabilities (softmax of head logits) for a token sequence.
std::vector<double> forward(const TokenSequence& tokens, const EncoderParams& params);

}  // namespace vgforge::model
