#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dreb/augment.hpp"
#include "dreb/types.hpp"

namespace dreb {

// Causal language model adapter. Implementations must be deterministic per
// prefix and reentrant for reads so candidates can be scored in parallel.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  // Natural-log probability of `token` given the preceding tokens.
  virtual double log_prob(std::span<const std::string> prefix,
                          const std::string& token) const = 0;

  // Full next-token distribution; exp of the values sums to 1 over the
  // model's vocabulary (unknowns pooled under "<unk>").
  virtual std::map<std::string, double> next_token_logprobs(
      std::span<const std::string> prefix) const = 0;

  // Per-position conditional log-probabilities of the whole sequence.
  virtual std::vector<double> sequence_logprobs(const TokenList& tokens) const;
};

// Mean negative log-likelihood per token: -(1/n) sum_i log P(w_i | w_<i),
// natural log. Throws on an empty sequence.
double log_ppl(const LanguageModel& lm, const TokenList& tokens);

// Scores every candidate's full token sequence (annotating `log_ppl`) and
// returns the index of the minimum; ties break to the lowest index.
std::size_t select_min_ppl(const LanguageModel& lm, std::vector<Candidate>& candidates);

// Laplace-smoothed n-gram model (default trigram) with backoff to shorter
// contexts when a context was never observed. Backoff triggers on the
// context alone, so every conditional distribution stays normalized, and
// add-one smoothing keeps all probabilities finite.
class NgramLm : public LanguageModel {
 public:
  static constexpr const char* kUnk = "<unk>";
  static constexpr const char* kBos = "<s>";

  explicit NgramLm(std::size_t order = 3);

  void fit(const std::vector<TokenList>& corpus);

  double log_prob(std::span<const std::string> prefix,
                  const std::string& token) const override;
  std::map<std::string, double> next_token_logprobs(
      std::span<const std::string> prefix) const override;

  std::size_t order() const { return order_; }
  std::size_t vocab_size() const { return vocab_.size(); }

  // Counts file: jsonl of {context, token, count}, one line per observed
  // n-gram of every order.
  void save_counts(const std::filesystem::path& path) const;
  static NgramLm load_counts(const std::filesystem::path& path);

 private:
  using Context = std::vector<std::string>;
  struct ContextCounts {
    std::map<std::string, std::size_t> tokens;
    std::size_t total = 0;
  };

  Context context_for(std::span<const std::string> prefix, std::size_t len) const;
  const ContextCounts* find_context(std::size_t order, const Context& ctx) const;
  double prob(const Context& ctx_full, const std::string& token) const;

  std::size_t order_;
  // counts_[k] maps length-k contexts to successor counts; counts_[0] holds
  // the unigram table under the empty context.
  std::vector<std::map<Context, ContextCounts>> counts_;
  std::map<std::string, bool> vocab_;  // emission vocabulary incl. <unk>
  bool fitted_ = false;
};

// Adapter for an external causal LM served over HTTP. Contract:
//   POST <base>/v1/sequence_logprobs  {"tokens": [...]}
//     -> {"logprobs": [...]}            one value per token
//   POST <base>/v1/next_token_logprobs {"prefix": [...]}
//     -> {"logprobs": {token: logprob}}
class RemoteLm : public LanguageModel {
 public:
  explicit RemoteLm(std::string base_url);

  double log_prob(std::span<const std::string> prefix,
                  const std::string& token) const override;
  std::map<std::string, double> next_token_logprobs(
      std::span<const std::string> prefix) const override;
  std::vector<double> sequence_logprobs(const TokenList& tokens) const override;

 private:
  std::string host_;
  int port_ = 80;
};

}  // namespace dreb
