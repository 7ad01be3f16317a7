#include "vgforge/model/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>

#include "vgforge/error.hpp"
#include "vgforge/image_io.hpp"
#include "vgforge/model/loss.hpp"
#include "vgforge/pcb.hpp"
#include "vgforge/rng.hpp"

namespace vgforge::model {

using nlohmann::json;

namespace {

constexpr int kDivergenceWindow = 10;

bool decays(const std::string& name) {
  const auto dot = name.rfind('.');
  const std::string leaf = dot == std::string::npos ? name : name.substr(dot + 1);
  return leaf.find("_w") != std::string::npos || (leaf.size() == 2 && leaf[0] == 'w');
}

struct SampleGrad {
  Gradients grads;
  double loss = 0.0;
};

/// Loss of one sample on a fresh tape; gradients land in `out.grads`.
void sample_step(const EncoderParams& p, const TrainConfig& cfg, const std::vector<TrainSample>& samples,
                 std::size_t j, int epoch, SampleGrad& out) {
  const TrainSample& s = samples[j];
  Tape tape;
  Graph g(tape, p, &out.grads);
  std::vector<std::pair<Var, double>> terms;
  if (cfg.objective == Objective::Joint) {
    const CloudGroups* cloud = &s.cloud;
    int consistent = 1;
    if (cfg.vgc && samples.size() > 1) {
      Rng rng(derive_seed(cfg.seed, "vgc-pair", static_cast<std::uint64_t>(epoch), j));
      if (rng.uniform() < 0.5) {
        auto other = static_cast<std::size_t>(rng.below(samples.size() - 1));
        if (other >= j) ++other;
        cloud = &samples[other].cloud;
        consistent = 0;
      }
    }
    const Var feat = g.encode(g.sequence({g.image_tokens(s.image), g.cloud_tokens(*cloud)}));
    terms.push_back({tape.softmax_cross_entropy(g.logits(feat), {s.image_label}, cfg.label_smoothing), 1.0});
    if (cfg.vgc) terms.push_back({tape.softmax_cross_entropy(g.vgc_logits(feat), {consistent}), cfg.vgc_weight});
  } else {
    const Var fi = g.encode(g.sequence({g.image_tokens(s.image)}));
    const Var fc = g.encode(g.sequence({g.cloud_tokens(s.cloud)}));
    terms.push_back({tape.softmax_cross_entropy(g.logits(fi), {s.image_label}, cfg.label_smoothing), 1.0});
    terms.push_back({tape.softmax_cross_entropy(g.logits(fc), {s.cloud_label}, cfg.label_smoothing), 1.0});
  }
  const Var loss = tape.weighted_sum(terms);
  out.loss = tape.value(loss)(0, 0);
  tape.backward(loss);
}

double learning_rate(const TrainConfig& cfg, long step, long total, long warmup) {
  if (step < warmup) return cfg.lr * static_cast<double>(step + 1) / static_cast<double>(warmup);
  if (total <= warmup) return cfg.lr;
  const double t = static_cast<double>(step - warmup) / static_cast<double>(total - warmup);
  return cfg.lr * 0.5 * (1.0 + std::cos(std::numbers::pi * t));
}

json eval_json(const EvalPoint& e) {
  return {{"epoch", e.epoch},
          {"joint_accuracy", e.joint_accuracy},
          {"image_accuracy", e.image_accuracy},
          {"cloud_accuracy", e.cloud_accuracy},
          {"joint_loss", e.joint_loss},
          {"image_loss", e.image_loss},
          {"cloud_loss", e.cloud_loss}};
}

template <class Body>
void parallel_each(std::size_t n, int workers, Body&& body) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, workers))
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::string to_string(Objective o) { return o == Objective::Joint ? "joint" : "dual"; }

Objective parse_objective(const std::string& s) {
  if (s == "joint") return Objective::Joint;
  if (s == "dual") return Objective::Dual;
  throw InvalidParameter("unknown objective '" + s + "' (expected joint|dual)");
}

void TrainConfig::validate() const {
  encoder.validate();
  if (epochs < 0) throw InvalidParameter("epochs must be >= 0");
  if (batch_size < 1) throw InvalidParameter("batch size must be >= 1");
  if (!(lr > 0.0)) throw InvalidParameter("learning rate must be positive");
  if (!(weight_decay >= 0.0)) throw InvalidParameter("weight decay must be >= 0");
  if (warmup_epochs < 0) throw InvalidParameter("warm-up epochs must be >= 0");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) throw InvalidParameter("label smoothing must lie in [0, 1)");
  if (vgc && !encoder.vgc_head) throw InvalidParameter("the VGC loss needs an encoder with a VGC head");
  if (vgc && objective != Objective::Joint) throw InvalidParameter("the VGC loss applies to the joint objective");
  if (eval_every < 1) throw InvalidParameter("eval interval must be >= 1");
  if (workers < 1) throw InvalidParameter("workers must be >= 1");
}

json to_json(const TrainConfig& c) {
  return {{"encoder", to_json(c.encoder)},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"betas", {c.beta1, c.beta2}},
          {"adam_eps", c.adam_eps},
          {"warmup_epochs", c.warmup_epochs},
          {"label_smoothing", c.label_smoothing},
          {"objective", to_string(c.objective)},
          {"vgc", c.vgc},
          {"vgc_weight", c.vgc_weight},
          {"target_accuracy", c.target_accuracy},
          {"eval_every", c.eval_every},
          {"seed", c.seed},
          {"workers", c.workers}};
}

json TrainingReport::to_json() const {
  json evs = json::array();
  for (const auto& e : evals) evs.push_back(eval_json(e));
  return {{"config", model::to_json(config)},
          {"samples", samples},
          {"parameters", parameters},
          {"epoch_loss", epoch_loss},
          {"evals", std::move(evs)},
          {"epochs_run", epochs_run},
          {"stopped_early", stopped_early},
          {"diverged", diverged},
          {"wall_seconds", wall_seconds}};
}

std::vector<TrainSample> load_samples(const dataset::DatasetManifest& m, const std::filesystem::path& root,
                                      const EncoderConfig& enc, int workers) {
  std::vector<TrainSample> out(m.records.size());
  parallel_each(out.size(), workers, [&](std::size_t j) {
    const auto& r = m.records[j];
    const auto img = decode_png(read_file(root / r.image_path));
    if (img.width != enc.image_size || img.height != enc.image_size)
      throw InvalidParameter(r.image_path + " is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                             ", encoder expects " + std::to_string(enc.image_size));
    out[j].image = image_patches(img, enc.patch);
    out[j].cloud = group_cloud(pcb::read(root / r.point_cloud_path), enc.point_patches, enc.group_size);
    out[j].image_label = r.image_label;
    out[j].cloud_label = r.cloud_label;
  });
  return out;
}

EvalPoint evaluate(const EncoderParams& params, const std::vector<TrainSample>& samples, int epoch, int workers) {
  struct Row {
    int pred[3];
    double loss[3];
  };
  std::vector<Row> rows(samples.size());
  parallel_each(samples.size(), workers, [&](std::size_t j) {
    const TrainSample& s = samples[j];
    Tape tape;
    Graph g(tape, params, nullptr);
    const Var vi = g.image_tokens(s.image);
    const Var vc = g.cloud_tokens(s.cloud);
    const Var seqs[3] = {g.sequence({vi, vc}), g.sequence({vi}), g.sequence({vc})};
    const int labels[3] = {s.image_label, s.image_label, s.cloud_label};
    for (int k = 0; k < 3; ++k) {
      const Matrix z = tape.value(g.logits(g.encode(seqs[k])));
      Eigen::Index arg = 0;
      z.row(0).maxCoeff(&arg);
      rows[j].pred[k] = static_cast<int>(arg);
      rows[j].loss[k] = ce_loss_from_logits(z, {labels[k]});
    }
  });
  EvalPoint e;
  e.epoch = epoch;
  double acc[3] = {0, 0, 0};
  double loss[3] = {0, 0, 0};
  for (std::size_t j = 0; j < samples.size(); ++j) {
    const int labels[3] = {samples[j].image_label, samples[j].image_label, samples[j].cloud_label};
    for (int k = 0; k < 3; ++k) {
      acc[k] += rows[j].pred[k] == labels[k] ? 1.0 : 0.0;
      loss[k] += rows[j].loss[k];
    }
  }
  const double n = samples.empty() ? 1.0 : static_cast<double>(samples.size());
  e.joint_accuracy = acc[0] / n;
  e.image_accuracy = acc[1] / n;
  e.cloud_accuracy = acc[2] / n;
  e.joint_loss = loss[0] / n;
  e.image_loss = loss[1] / n;
  e.cloud_loss = loss[2] / n;
  return e;
}

TrainingReport train_toy(const std::vector<TrainSample>& samples, const TrainConfig& cfg, EncoderParams* trained) {
  cfg.validate();
  if (samples.empty()) throw InvalidParameter("no training samples");
  const auto start = std::chrono::steady_clock::now();
  EncoderParams params(cfg.encoder, derive_seed(cfg.seed, "init", 0));
  auto& tensors = params.tensors();
  std::vector<bool> decay(tensors.size());
  for (std::size_t k = 0; k < tensors.size(); ++k) decay[k] = decays(tensors[k].name);
  Gradients m1 = zero_gradients(params);
  Gradients m2 = zero_gradients(params);

  TrainingReport rep;
  rep.config = cfg;
  rep.samples = samples.size();
  rep.parameters = params.scalar_count();
  rep.evals.push_back(evaluate(params, samples, 0, cfg.workers));

  const std::size_t B = static_cast<std::size_t>(cfg.batch_size);
  const long steps_per_epoch = static_cast<long>((samples.size() + B - 1) / B);
  const long total = steps_per_epoch * cfg.epochs;
  const long warmup = steps_per_epoch * cfg.warmup_epochs;
  long step = 0;
  std::vector<SampleGrad> work(std::min(B, samples.size()));

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto order = Rng(derive_seed(cfg.seed, "epoch-order", static_cast<std::uint64_t>(epoch))).permutation(samples.size());
    double epoch_loss = 0.0;
    for (std::size_t b0 = 0; b0 < order.size(); b0 += B, ++step) {
      const std::size_t nb = std::min(B, order.size() - b0);
      parallel_each(nb, cfg.workers, [&](std::size_t k) {
        work[k].grads = zero_gradients(params);
        sample_step(params, cfg, samples, order[b0 + k], epoch, work[k]);
      });
      Gradients grad = zero_gradients(params);
      for (std::size_t k = 0; k < nb; ++k) {
        for (std::size_t t = 0; t < grad.size(); ++t) grad[t] += work[k].grads[t];
        epoch_loss += work[k].loss;
      }
      const double lr = learning_rate(cfg, step, total, warmup);
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step + 1));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step + 1));
      for (std::size_t t = 0; t < tensors.size(); ++t) {
        const Matrix g = grad[t] / static_cast<double>(nb);
        m1[t] = cfg.beta1 * m1[t] + (1.0 - cfg.beta1) * g;
        m2[t] = cfg.beta2 * m2[t] + (1.0 - cfg.beta2) * g.cwiseProduct(g);
        Matrix& w = tensors[t].value;
        if (decay[t]) w *= 1.0 - lr * cfg.weight_decay;
        w.array() -= lr * (m1[t].array() / bc1) / ((m2[t].array() / bc2).sqrt() + cfg.adam_eps);
      }
    }
    epoch_loss /= static_cast<double>(samples.size());
    rep.epoch_loss.push_back(epoch_loss);
    rep.epochs_run = epoch;
    if (!std::isfinite(epoch_loss)) {
      rep.diverged = true;
      break;
    }
    if (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
      rep.evals.push_back(evaluate(params, samples, epoch, cfg.workers));
      const auto& e = rep.evals.back();
      const double tracked = cfg.objective == Objective::Joint ? e.joint_accuracy : e.image_accuracy;
      if (cfg.target_accuracy > 0.0 && tracked >= cfg.target_accuracy) {
        rep.stopped_early = epoch < cfg.epochs;
        break;
      }
    }
  }
  if (rep.evals.back().epoch != rep.epochs_run) rep.evals.push_back(evaluate(params, samples, rep.epochs_run, cfg.workers));
  for (std::size_t e = 0; e + kDivergenceWindow < rep.epoch_loss.size(); ++e)
    if (rep.epoch_loss[e + kDivergenceWindow] > rep.epoch_loss[e]) rep.diverged = true;

  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (trained) *trained = std::move(params);
  return rep;
}

TrainingReport train_toy(const dataset::DatasetManifest& m, const std::filesystem::path& root, const TrainConfig& cfg,
                         EncoderParams* trained) {
  if (m.C > 32 || m.M > 64) throw InvalidParameter("train_toy is limited to C <= 32 and M <= 64");
  if (cfg.encoder.depth > 4 || cfg.encoder.width > 128)
    throw InvalidParameter("train_toy is limited to depth <= 4 and width <= 128");
  if (static_cast<std::size_t>(cfg.encoder.classes) != m.C)
    throw InvalidParameter("encoder classes (" + std::to_string(cfg.encoder.classes) + ") must equal C (" +
                           std::to_string(m.C) + ")");
  return train_toy(load_samples(m, root, cfg.encoder, cfg.workers), cfg, trained);
}

}  // namespace vgforge::model
