#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "vgforge/manifest.hpp"
#include "vgforge/model/encoder.hpp"

namespace vgforge::model {

/// Joint: one sequence (class token, image tokens, cloud tokens) per sample,
/// supervised with the image label. Dual: separate image and cloud passes,
/// each supervised with its own label.
enum class Objective { Joint, Dual };

std::string to_string(Objective o);
Objective parse_objective(const std::string& s);

struct TrainConfig {
  EncoderConfig encoder{};
  int epochs = 100;
  int batch_size = 32;
  double lr = 5e-4;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int warmup_epochs = 5;
  double label_smoothing = 0.0;
  Objective objective = Objective::Joint;
  bool vgc = false;  // adds the pair-consistency loss (joint objective only)
  double vgc_weight = 1.0;
  /// Stop once the tracked train accuracy (joint, or image for Dual) reaches this; 0 disables.
  double target_accuracy = 0.0;
  int eval_every = 1;
  std::uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);

/// Parameter-independent inputs of one record, computed once.
struct TrainSample {
  ImagePatches image;
  CloudGroups cloud;
  int image_label = 0;
  int cloud_label = 0;
};

/// Reads every record's PNG and .pcb under `root` and tokenizes the geometry.
std::vector<TrainSample> load_samples(const dataset::DatasetManifest& m, const std::filesystem::path& root,
                                      const EncoderConfig& enc, int workers = 1);

struct EvalPoint {
  int epoch = 0;
  double joint_accuracy = 0.0;
  double image_accuracy = 0.0;
  double cloud_accuracy = 0.0;
  double joint_loss = 0.0;  // against image labels
  double image_loss = 0.0;  // against image labels
  double cloud_loss = 0.0;  // against cloud labels
};

/// Train-set accuracy and mean CE in joint, image-only and cloud-only modes.
EvalPoint evaluate(const EncoderParams& params, const std::vector<TrainSample>& samples, int epoch, int workers = 1);

struct TrainingReport {
  TrainConfig config{};
  std::size_t samples = 0;
  std::size_t parameters = 0;
  std::vector<double> epoch_loss;
  std::vector<EvalPoint> evals;  // evals[0] is the untrained model
  int epochs_run = 0;
  bool stopped_early = false;
  /// Non-finite loss, or loss[e + 10] > loss[e] for some epoch e.
  bool diverged = false;
  double wall_seconds = 0.0;

  const EvalPoint& last() const { return evals.back(); }
  nlohmann::json to_json() const;
};

/// AdamW with linear warm-up and cosine decay over mini-batches. Per-sample
/// gradients are reduced in sample order, so results do not depend on workers.
TrainingReport train_toy(const std::vector<TrainSample>& samples, const TrainConfig& cfg,
                         EncoderParams* trained = nullptr);

/// Desk-scale entry point: C <= 32, M <= 64, depth <= 4, width <= 128.
TrainingReport train_toy(const dataset::DatasetManifest& m, const std::filesystem::path& root, const TrainConfig& cfg,
                         EncoderParams* trained = nullptr);

}  // namespace vgforge::model
