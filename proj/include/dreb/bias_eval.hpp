#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "dreb/augment.hpp"
#include "dreb/types.hpp"
#include "dreb/views.hpp"

namespace dreb {

// Rewrites every sample to its entity-only view, with spans re-pointed at
// the entity surfaces inside the new token list. Labels and ids carry over.
Dataset build_entity_bias_dataset(const Dataset& train);

struct BiasEvalConfig {
  std::uint64_t seed = 0;
  std::size_t embed_dim = 16;
  std::size_t epochs = 80;
  std::size_t batch_size = 32;
  double lr = 0.5;
  double heldout_fraction = 0.1;
};

// Entity-bias model: a bag of embeddings over the two entity surfaces plus
// type embeddings, through a single softmax layer. Scoring reads only the
// entity fields of a sample, so context can never influence the score.
class BiasEvaluator {
 public:
  static BiasEvaluator train(const Dataset& d_bias, const BiasEvalConfig& cfg);

  // Distribution over schema labels for the sample's entities.
  std::vector<double> label_probs(const Sample& s) const;

  // Probability the evaluator assigns to the gold relation; in [0, 1],
  // higher means more entity bias.
  double score(const Sample& s) const;

  double heldout_accuracy() const { return heldout_accuracy_; }
  const RelationSchema& schema() const { return schema_; }

  void save(const std::filesystem::path& path) const;
  static BiasEvaluator load(const std::filesystem::path& path);

 private:
  void rebuild_index();
  std::size_t token_id(const std::string& tok) const;
  std::size_t type_id(const std::string& type) const;
  std::vector<double> features(const Sample& s) const;

  RelationSchema schema_;
  std::vector<std::string> vocab_;       // index 0 = <unk>
  std::vector<std::string> type_vocab_;  // index 0 = <unk>
  std::unordered_map<std::string, std::size_t> vocab_index_;
  std::unordered_map<std::string, std::size_t> type_index_;
  std::size_t embed_dim_ = 0;
  std::vector<double> token_emb_;  // vocab x embed_dim, row-major
  std::vector<double> type_emb_;   // types x embed_dim
  std::vector<double> weight_;     // labels x 3*embed_dim
  std::vector<double> bias_;       // labels
  double heldout_accuracy_ = 0.0;

  friend class BiasEvaluatorTrainer;
};

// Spec-level entry point: probability of the candidate's gold relation
// given its entity-only view.
double bias_score(const BiasEvaluator& ev, const Candidate& c);

}  // namespace dreb
