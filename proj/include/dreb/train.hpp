#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dreb/augment.hpp"
#include "dreb/bias_eval.hpp"
#include "dreb/classifier.hpp"
#include "dreb/losses.hpp"
#include "dreb/types.hpp"

namespace dreb {

enum class LossKind { Ce, Focal, Rdrop, Dfl, Poe, Cda, Rda, MixDebias };

LossKind loss_from_name(const std::string& name);
const char* loss_name(LossKind kind);

struct LossConfig {
  LossKind kind = LossKind::Ce;
  DebiasConfig debias;

  // Which auxiliary signals the chosen loss consumes.
  bool needs_augmentation() const {
    return kind == LossKind::Rda || kind == LossKind::MixDebias;
  }
  bool needs_context() const {
    return kind == LossKind::Cda || kind == LossKind::MixDebias;
  }
  bool needs_bias_model() const {
    return kind == LossKind::Dfl || kind == LossKind::Poe;
  }
  bool needs_dropout() const { return kind == LossKind::Rdrop; }
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double lr = 0.5;
  ClassifierConfig model;
};

struct TrainRun {
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  std::size_t batch_size = 0;
  double lr = 0.0;
  std::string loss;
  std::vector<double> loss_history;    // mean per-sample loss per epoch
  std::vector<double> dev_f1_history;  // origin-dev micro-F1 per epoch
  std::size_t best_epoch = 0;
  double best_dev_f1 = 0.0;
  std::size_t augment_fallbacks = 0;

  nlohmann::json to_json() const;
};

struct TrainResult {
  RelationClassifier model;
  TrainRun run;
};

// Trains the reference classifier. Per batch the model runs a full-view
// pass, and depending on the loss, an entity-swapped pass (gradients flow
// through both), a context-only pass (treated as a constant bias estimate;
// no gradient flows into it), two dropout passes, or a frozen entity-bias
// model lookup. Deterministic for a fixed config+seed; the best
// origin-dev-F1 checkpoint is returned.
TrainResult train(const Dataset& train_ds, const Dataset& dev_ds,
                  const EntityDict* entity_dict, const BiasEvaluator* bias_model,
                  const LossConfig& loss_cfg, const RunConfig& run_cfg);

}  // namespace dreb
