#pragma once

#include <string>
#include <vector>

#include "dreb/classifier.hpp"
#include "dreb/types.hpp"

namespace dreb {

struct EvalConfig {
  double bme_alpha = 0.5;
  // TACRED community convention: the negative label is not scored.
  bool exclude_negative_from_f1 = true;

  void validate() const;
};

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

// Micro-averaged counts over positive labels; with exclusion off the
// negative label is scored like any other and micro-F1 equals accuracy.
ConfusionCounts micro_counts(const std::vector<std::string>& preds,
                             const std::vector<std::string>& golds,
                             const RelationSchema& schema, bool exclude_negative);

double micro_f1(const std::vector<std::string>& preds,
                const std::vector<std::string>& golds, const RelationSchema& schema,
                bool exclude_negative = true);

// Bias mitigation efficiency:
//   alpha * f1_origin_new / f1_origin_base
//   + (1 - alpha) * f1_dreb_new / f1_dreb_base.
// Throws when either baseline score is zero.
double bme(double f1_origin_base, double f1_dreb_base, double f1_origin_new,
           double f1_dreb_new, double alpha = 0.5);

struct ProbabilityHistogram {
  std::vector<std::size_t> counts;
  std::size_t total = 0;

  double top_bin_mass() const;
};

// Histogram over [0, 1] of the max label probability the model assigns to
// each sample's entity-only view.
ProbabilityHistogram entity_only_histogram(const RelationClassifier& model,
                                           const Dataset& dataset,
                                           std::size_t bins = 20);

std::vector<std::string> predict_all(const RelationClassifier& model,
                                     const Dataset& dataset,
                                     double core_strength = 0.0);

std::vector<std::string> gold_labels(const Dataset& dataset);

// Picks the CoRE adjustment strength with the best dev F1 over a small
// grid (ties to the smaller strength).
double select_core_strength(const RelationClassifier& model, const Dataset& dev,
                            const std::vector<double>& grid, bool exclude_negative);

}  // namespace dreb
