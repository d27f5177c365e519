#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dreb/rng.hpp"
#include "dreb/types.hpp"
#include "dreb/views.hpp"

namespace dreb {

struct ClassifierConfig {
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;
  double dropout = 0.0;  // hidden-layer dropout in stochastic mode
  std::uint64_t init_seed = 0;
};

// Small reference relation classifier:
//   features = [mean(all tokens), mean(subj span), mean(obj span),
//               subj type emb, obj type emb]
//   -> tanh hidden layer -> softmax.
// Deterministic mode is repeatable; stochastic mode applies dropout driven
// by a caller-supplied generator. Encoder adapters can wrap larger models
// behind the same forward surface.
class RelationClassifier {
 public:
  struct Forward {
    std::vector<double> logits;
    std::vector<double> probs;
    // backward pass state
    std::vector<double> features;
    std::vector<double> hidden;        // post-activation, post-dropout
    std::vector<double> dropout_mask;  // empty in deterministic mode
    std::vector<std::size_t> token_ids;
    std::vector<std::size_t> subj_ids;
    std::vector<std::size_t> obj_ids;
    std::size_t subj_type_id = 0;
    std::size_t obj_type_id = 0;
  };

  struct Grads {
    std::vector<double> token_emb, type_emb, w1, b1, w2, b2;
    void accumulate_zero(const RelationClassifier& m);
  };

  RelationClassifier() = default;

  // Vocabulary from the training split's full views plus every placeholder
  // and type tag the other views can produce; weights from init_seed.
  static RelationClassifier init(const Dataset& train, const ClassifierConfig& cfg);

  Forward forward(const ViewEncoding& enc, bool stochastic = false,
                  Rng* rng = nullptr) const;
  void backward(const Forward& fwd, std::span<const double> dloss_dlogits,
                Grads& grads) const;
  void apply_sgd(const Grads& grads, double lr, std::size_t batch_size);

  Forward forward_view(const Sample& s, InputView view) const;
  std::vector<double> predict_probs(const Sample& s, InputView view) const;
  std::size_t predict_index(const Sample& s) const;
  std::string predict_label(const Sample& s) const;

  const RelationSchema& schema() const { return schema_; }
  const ClassifierConfig& config() const { return cfg_; }
  std::size_t vocab_size() const { return vocab_.size(); }

  // Mean learned token embedding of a token list; the built-in sentence
  // embedder for the analysis reports.
  std::vector<double> embed_tokens(const TokenList& tokens) const;

  void save(const std::filesystem::path& path) const;
  static RelationClassifier load(const std::filesystem::path& path);

 private:
  std::size_t token_id(const std::string& tok) const;
  std::size_t type_id(const std::string& type) const;

  ClassifierConfig cfg_;
  RelationSchema schema_;
  std::vector<std::string> vocab_;       // index 0 = <unk>
  std::vector<std::string> type_vocab_;  // index 0 = <unk>
  std::unordered_map<std::string, std::size_t> vocab_index_;
  std::unordered_map<std::string, std::size_t> type_index_;
  std::vector<double> token_emb_;  // vocab x E
  std::vector<double> type_emb_;   // types x E
  std::vector<double> w1_;         // H x 5E
  std::vector<double> b1_;         // H
  std::vector<double> w2_;         // L x H
  std::vector<double> b2_;         // L
};

}  // namespace dreb
