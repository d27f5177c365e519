#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "dreb/classifier.hpp"
#include "dreb/pca.hpp"
#include "dreb/types.hpp"

namespace dreb {

// Relation-type distribution comparison between a source dataset and a
// benchmark built from it. TV distance is 0 exactly when the per-label
// proportions match.
struct DistributionReport {
  std::vector<std::string> labels;
  std::map<std::string, std::size_t> original_counts;
  std::map<std::string, std::size_t> benchmark_counts;
  double total_variation = 0.0;

  nlohmann::json to_json() const;
  void save_csv(const std::filesystem::path& path) const;
};

DistributionReport distribution_report(const Dataset& original,
                                       const Dataset& benchmark);

// Sentence embedding interface for the semantic comparison. Implementations
// must be deterministic.
class SentenceEmbedder {
 public:
  virtual ~SentenceEmbedder() = default;
  virtual std::vector<double> embed(const TokenList& tokens) const = 0;
  virtual std::size_t dim() const = 0;
};

// Mean of per-token pseudo-random vectors keyed on the token text. Stands
// in when no trained encoder is available.
class HashEmbedder : public SentenceEmbedder {
 public:
  explicit HashEmbedder(std::size_t dim = 32, std::uint64_t seed = 0);
  std::vector<double> embed(const TokenList& tokens) const override;
  std::size_t dim() const override { return dim_; }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

// Mean of the reference classifier's learned token embeddings.
class ClassifierEmbedder : public SentenceEmbedder {
 public:
  explicit ClassifierEmbedder(std::shared_ptr<const RelationClassifier> model)
      : model_(std::move(model)) {}
  std::vector<double> embed(const TokenList& tokens) const override {
    return model_->embed_tokens(tokens);
  }
  std::size_t dim() const override { return model_->config().embed_dim; }

 private:
  std::shared_ptr<const RelationClassifier> model_;
};

// 2-D PCA projection of both point clouds (components fit on the union)
// plus a nearest-neighbour overlap statistic. With equal sizes the ratio
// compares each benchmark point's distance to the originals (own index
// excluded) against the originals' leave-one-out spacing, so identical
// clouds score exactly 1 and a shifted cloud scores above 1.
struct SemanticReport {
  Matrix original_points;   // n x 2
  Matrix benchmark_points;  // n x 2
  double overlap_ratio = 0.0;
  double explained_variance = 0.0;  // top-2 eigenvalue share

  nlohmann::json to_json() const;
  void save_csv(const std::filesystem::path& path) const;
};

SemanticReport semantic_report(const Dataset& original, const Dataset& benchmark,
                               const SentenceEmbedder& embedder);

}  // namespace dreb
