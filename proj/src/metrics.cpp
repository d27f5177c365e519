#include "dreb/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "dreb/losses.hpp"

namespace dreb {

void EvalConfig::validate() const {
  if (bme_alpha < 0.0 || bme_alpha > 1.0) {
    throw ConfigError("bme_alpha must lie in [0, 1]");
  }
}

double ConfusionCounts::precision() const {
  return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double ConfusionCounts::recall() const {
  return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double ConfusionCounts::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

ConfusionCounts micro_counts(const std::vector<std::string>& preds,
                             const std::vector<std::string>& golds,
                             const RelationSchema& schema, bool exclude_negative) {
  if (preds.size() != golds.size()) {
    throw ValidationError("prediction/gold length mismatch: " +
                          std::to_string(preds.size()) + " vs " +
                          std::to_string(golds.size()));
  }
  const std::string& neg = schema.negative_label;
  const bool use_neg = exclude_negative && !neg.empty();
  ConfusionCounts c;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool pred_pos = !use_neg || preds[i] != neg;
    const bool gold_pos = !use_neg || golds[i] != neg;
    if (pred_pos && preds[i] == golds[i]) {
      ++c.tp;
    } else {
      if (pred_pos) ++c.fp;
      if (gold_pos) ++c.fn;
    }
  }
  return c;
}

double micro_f1(const std::vector<std::string>& preds,
                const std::vector<std::string>& golds, const RelationSchema& schema,
                bool exclude_negative) {
  return micro_counts(preds, golds, schema, exclude_negative).f1();
}

double bme(double f1_origin_base, double f1_dreb_base, double f1_origin_new,
           double f1_dreb_new, double alpha) {
  if (f1_origin_base <= 0.0 || f1_dreb_base <= 0.0) {
    throw ValidationError("bme baselines must be positive");
  }
  return alpha * (f1_origin_new / f1_origin_base) +
         (1.0 - alpha) * (f1_dreb_new / f1_dreb_base);
}

double ProbabilityHistogram::top_bin_mass() const {
  if (total == 0 || counts.empty()) return 0.0;
  return static_cast<double>(counts.back()) / static_cast<double>(total);
}

ProbabilityHistogram entity_only_histogram(const RelationClassifier& model,
                                           const Dataset& dataset,
                                           std::size_t bins) {
  if (bins == 0) {
    throw ConfigError("histogram needs at least one bin");
  }
  ProbabilityHistogram h;
  h.counts.assign(bins, 0);
  for (const auto& s : dataset.samples) {
    const std::vector<double> p = model.predict_probs(s, InputView::EntityOnly);
    const double mx = *std::max_element(p.begin(), p.end());
    std::size_t bin = static_cast<std::size_t>(mx * static_cast<double>(bins));
    if (bin >= bins) bin = bins - 1;  // mx == 1.0
    ++h.counts[bin];
    ++h.total;
  }
  return h;
}

std::vector<std::string> predict_all(const RelationClassifier& model,
                                     const Dataset& dataset, double core_strength) {
  std::vector<std::string> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.samples) {
    if (core_strength == 0.0) {
      out.push_back(model.predict_label(s));
      continue;
    }
    const auto full = model.forward_view(s, InputView::Full);
    const auto entity = model.forward_view(s, InputView::EntityOnly);
    const std::vector<double> p = core_adjust(full.logits, entity.logits, core_strength);
    const std::size_t idx =
        static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    out.push_back(model.schema().labels[idx]);
  }
  return out;
}

std::vector<std::string> gold_labels(const Dataset& dataset) {
  std::vector<std::string> out;
  out.reserve(dataset.size());
  for (const auto& s : dataset.samples) out.push_back(s.relation);
  return out;
}

double select_core_strength(const RelationClassifier& model, const Dataset& dev,
                            const std::vector<double>& grid, bool exclude_negative) {
  if (grid.empty()) {
    throw ConfigError("core strength grid is empty");
  }
  const std::vector<std::string> golds = gold_labels(dev);
  double best_strength = grid.front();
  double best_f1 = -1.0;
  for (double strength : grid) {
    const double f1 = micro_f1(predict_all(model, dev, strength), golds,
                               model.schema(), exclude_negative);
    if (f1 > best_f1) {
      best_f1 = f1;
      best_strength = strength;
    }
  }
  return best_strength;
}

}  // namespace dreb
