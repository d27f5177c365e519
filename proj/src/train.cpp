#include "dreb/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dreb/metrics.hpp"
#include "dreb/rng.hpp"

namespace dreb {

using nlohmann::json;

LossKind loss_from_name(const std::string& name) {
  if (name == "ce") return LossKind::Ce;
  if (name == "focal") return LossKind::Focal;
  if (name == "rdrop") return LossKind::Rdrop;
  if (name == "dfl") return LossKind::Dfl;
  if (name == "poe") return LossKind::Poe;
  if (name == "cda") return LossKind::Cda;
  if (name == "rda") return LossKind::Rda;
  if (name == "mixdebias") return LossKind::MixDebias;
  throw ConfigError("unknown loss '" + name + "'");
}

const char* loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::Ce:
      return "ce";
    case LossKind::Focal:
      return "focal";
    case LossKind::Rdrop:
      return "rdrop";
    case LossKind::Dfl:
      return "dfl";
    case LossKind::Poe:
      return "poe";
    case LossKind::Cda:
      return "cda";
    case LossKind::Rda:
      return "rda";
    case LossKind::MixDebias:
      return "mixdebias";
  }
  return "ce";
}

namespace {

// dL/dlogits from dL/dprobs through the softmax Jacobian.
std::vector<double> chain_softmax(const std::vector<double>& probs,
                                  const std::vector<double>& dprobs) {
  double dot = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += dprobs[i] * probs[i];
  std::vector<double> out(probs.size());
  for (std::size_t k = 0; k < probs.size(); ++k) {
    out[k] = probs[k] * (dprobs[k] - dot);
  }
  return out;
}

std::vector<double> onehot_ce_dlogits(const std::vector<double>& probs,
                                      std::size_t gold) {
  std::vector<double> out = probs;
  out[gold] -= 1.0;
  return out;
}

}  // namespace

TrainResult train(const Dataset& train_ds, const Dataset& dev_ds,
                  const EntityDict* entity_dict, const BiasEvaluator* bias_model,
                  const LossConfig& loss_cfg, const RunConfig& run_cfg) {
  train_ds.validate();
  dev_ds.validate();
  loss_cfg.debias.validate();
  if (run_cfg.batch_size == 0 || run_cfg.epochs == 0) {
    throw ConfigError("epochs and batch_size must be positive");
  }
  if (loss_cfg.needs_augmentation() && entity_dict == nullptr) {
    throw ConfigError(std::string(loss_name(loss_cfg.kind)) +
                      " loss needs an entity dictionary");
  }
  if (loss_cfg.needs_bias_model() && bias_model == nullptr) {
    throw ConfigError(std::string(loss_name(loss_cfg.kind)) +
                      " loss needs a trained entity-bias model");
  }
  if (loss_cfg.needs_dropout() && run_cfg.model.dropout <= 0.0) {
    throw ConfigError("rdrop needs a positive dropout rate");
  }

  ClassifierConfig model_cfg = run_cfg.model;
  model_cfg.init_seed = run_cfg.seed;
  RelationClassifier model = RelationClassifier::init(train_ds, model_cfg);
  const RelationSchema& schema = model.schema();
  const DebiasConfig& dc = loss_cfg.debias;

  // Frozen bias-only probabilities are fixed per sample; compute once.
  std::vector<std::vector<double>> biasonly;
  if (loss_cfg.needs_bias_model()) {
    biasonly.reserve(train_ds.size());
    for (const auto& s : train_ds.samples) {
      biasonly.push_back(bias_model->label_probs(s));
    }
  }

  std::vector<std::size_t> golds(train_ds.size());
  for (std::size_t i = 0; i < train_ds.size(); ++i) {
    golds[i] = schema.label_index(train_ds.samples[i].relation);
  }
  const std::vector<std::string> dev_golds = gold_labels(dev_ds);

  TrainRun run;
  run.seed = run_cfg.seed;
  run.epochs = run_cfg.epochs;
  run.batch_size = run_cfg.batch_size;
  run.lr = run_cfg.lr;
  run.loss = loss_name(loss_cfg.kind);

  // Independent streams: the batch order must not shift when a loss that
  // draws augmentations or dropout masks is swapped in, or the degeneration
  // identities stop holding trajectory-for-trajectory.
  Rng shuffle_rng(stream_seed(run_cfg.seed, 1));
  Rng aug_rng(stream_seed(run_cfg.seed, 2));
  Rng dropout_rng(stream_seed(run_cfg.seed, 3));
  AugmentStats aug_stats;
  std::vector<std::size_t> order(train_ds.size());
  std::iota(order.begin(), order.end(), 0);

  RelationClassifier best_model = model;
  double best_f1 = -1.0;
  std::size_t best_epoch = 0;

  RelationClassifier::Grads grads;
  for (std::size_t epoch = 0; epoch < run_cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;

    for (std::size_t start = 0; start < order.size(); start += run_cfg.batch_size) {
      const std::size_t stop = std::min(start + run_cfg.batch_size, order.size());
      grads.accumulate_zero(model);

      for (std::size_t pos = start; pos < stop; ++pos) {
        const std::size_t idx = order[pos];
        const Sample& s = train_ds.samples[idx];
        const std::size_t gold = golds[idx];

        if (loss_cfg.kind == LossKind::Rdrop) {
          auto f1 = model.forward(render_encoding(s, InputView::Full), true, &dropout_rng);
          auto f2 = model.forward(render_encoding(s, InputView::Full), true, &dropout_rng);
          loss_sum += rdrop_loss(f1.probs, f2.probs, gold, dc.rdrop_weight, dc.epsilon);
          PairGrad g = rdrop_grad(f1.probs, f2.probs, gold, dc.rdrop_weight, dc.epsilon);
          model.backward(f1, chain_softmax(f1.probs, g.first), grads);
          model.backward(f2, chain_softmax(f2.probs, g.second), grads);
          continue;
        }

        auto full = model.forward(render_encoding(s, InputView::Full));

        switch (loss_cfg.kind) {
          case LossKind::Ce: {
            loss_sum += cross_entropy(full.probs, gold, dc.epsilon);
            model.backward(full, onehot_ce_dlogits(full.probs, gold), grads);
            break;
          }
          case LossKind::Focal: {
            loss_sum += focal_loss(full.probs, gold, dc.focal_gamma, dc.epsilon);
            auto g = focal_grad(full.probs, gold, dc.focal_gamma, dc.epsilon);
            model.backward(full, chain_softmax(full.probs, g), grads);
            break;
          }
          case LossKind::Dfl: {
            loss_sum += dfl_loss(full.probs, biasonly[idx], gold, dc.focal_gamma,
                                 dc.epsilon);
            PairGrad g = dfl_grad(full.probs, biasonly[idx], gold, dc.focal_gamma,
                                  dc.epsilon);
            model.backward(full, chain_softmax(full.probs, g.first), grads);
            break;
          }
          case LossKind::Poe: {
            loss_sum += poe_loss(full.probs, biasonly[idx], gold, dc.epsilon);
            PairGrad g = poe_grad(full.probs, biasonly[idx], gold, dc.epsilon);
            model.backward(full, chain_softmax(full.probs, g.first), grads);
            break;
          }
          case LossKind::Cda: {
            auto ctx = model.forward(render_encoding(s, InputView::ContextOnly));
            loss_sum += cda_loss(full.probs, ctx.probs, dc.lambda, gold, dc.epsilon,
                                 dc.clamp_bias);
            CdaGrad g = cda_grad(full.probs, ctx.probs, dc.lambda, gold, dc.epsilon,
                                 dc.clamp_bias);
            // The context pass estimates the bias weight; it is not a
            // training target, so no gradient flows back through it.
            model.backward(full, chain_softmax(full.probs, g.p), grads);
            break;
          }
          case LossKind::Rda: {
            Sample aug = sample_augmented(s, *entity_dict, aug_rng, &aug_stats);
            auto fa = model.forward(render_encoding(aug, InputView::Full));
            loss_sum += cross_entropy(full.probs, gold, dc.epsilon) +
                        dc.beta * rda_loss(full.probs, fa.probs, dc.epsilon);
            PairGrad g = rda_grad(full.probs, fa.probs, dc.epsilon);
            std::vector<double> dprobs(g.first.size(), 0.0);
            for (std::size_t i = 0; i < dprobs.size(); ++i) {
              dprobs[i] = dc.beta * g.first[i];
            }
            std::vector<double> dlogits = chain_softmax(full.probs, dprobs);
            std::vector<double> ce = onehot_ce_dlogits(full.probs, gold);
            for (std::size_t i = 0; i < dlogits.size(); ++i) dlogits[i] += ce[i];
            model.backward(full, dlogits, grads);
            for (double& v : g.second) v *= dc.beta;
            model.backward(fa, chain_softmax(fa.probs, g.second), grads);
            break;
          }
          case LossKind::MixDebias: {
            Sample aug = sample_augmented(s, *entity_dict, aug_rng, &aug_stats);
            auto fa = model.forward(render_encoding(aug, InputView::Full));
            auto ctx = model.forward(render_encoding(s, InputView::ContextOnly));
            loss_sum += mixdebias_loss(full.probs, fa.probs, ctx.probs, gold, dc);
            MixDebiasGrad g = mixdebias_grad(full.probs, fa.probs, ctx.probs, gold, dc);
            model.backward(full, chain_softmax(full.probs, g.p), grads);
            model.backward(fa, chain_softmax(fa.probs, g.aug), grads);
            // Context pass detached, as in the cda branch.
            break;
          }
          case LossKind::Rdrop:
            break;  // handled before the full-view pass
        }
      }

      model.apply_sgd(grads, run_cfg.lr, stop - start);
    }

    run.loss_history.push_back(loss_sum / static_cast<double>(train_ds.size()));

    const double dev_f1 =
        micro_f1(predict_all(model, dev_ds), dev_golds, schema, true);
    run.dev_f1_history.push_back(dev_f1);
    if (dev_f1 > best_f1) {
      best_f1 = dev_f1;
      best_epoch = epoch;
      best_model = model;
    }
  }

  run.best_epoch = best_epoch;
  run.best_dev_f1 = best_f1;
  run.augment_fallbacks = aug_stats.fallbacks;
  return {std::move(best_model), std::move(run)};
}

json TrainRun::to_json() const {
  json doc;
  doc["seed"] = seed;
  doc["epochs"] = epochs;
  doc["batch_size"] = batch_size;
  doc["lr"] = lr;
  doc["loss"] = loss;
  doc["loss_history"] = loss_history;
  doc["dev_f1_history"] = dev_f1_history;
  doc["best_epoch"] = best_epoch;
  doc["best_dev_f1"] = best_dev_f1;
  doc["augment_fallbacks"] = augment_fallbacks;
  return doc;
}

}  // namespace dreb
