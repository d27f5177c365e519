#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dreb/io.hpp"
#include "dreb/rng.hpp"
#include "dreb/types.hpp"

namespace dreb {

enum class DictSource { TrainInternal, ExternalPool };

// Type-indexed entity surface forms. Surfaces are deduplicated and kept in
// first-occurrence order, so builds are deterministic.
class EntityDict {
 public:
  EntityDict() = default;
  explicit EntityDict(DictSource source) : source_(source) {}

  // Registers both entity surfaces of every sample under their types.
  static EntityDict from_dataset(const Dataset& d);

  // External pool variant. `type_map` (optional) remaps pool entity types
  // onto the dataset taxonomy.
  static EntityDict from_pool_records(
      const std::vector<PoolRecord>& records,
      const std::map<std::string, std::string>* type_map = nullptr);

  void add(const std::string& type, const TokenList& surface);
  bool has_type(const std::string& type) const;
  const std::vector<TokenList>& surfaces(const std::string& type) const;
  const std::map<std::string, std::vector<TokenList>>& by_type() const {
    return by_type_;
  }
  DictSource source() const { return source_; }
  std::size_t type_count() const { return by_type_.size(); }

 private:
  std::map<std::string, std::vector<TokenList>> by_type_;
  DictSource source_ = DictSource::TrainInternal;
};

struct Replacement {
  TokenList surface;
  std::string origin;  // "original", "train-dict", "pool", ...
  friend bool operator==(const Replacement&, const Replacement&) = default;
};

// A pseudo-sample produced by entity replacement, plus its provenance and
// (once scored) the two filter signals.
struct Candidate {
  Sample sample;
  std::string source_id;
  Replacement subj_replacement;
  Replacement obj_replacement;
  std::optional<double> bias_score;
  std::optional<double> log_ppl;
};

// Rebuilds the sentence with both entity surfaces swapped and spans
// re-indexed. Non-entity tokens are untouched; types and relation carry
// over unchanged.
Sample replace_entities(const Sample& s, const TokenList& new_subj,
                        const TokenList& new_obj);

struct AugmentStats {
  std::size_t draws = 0;
  std::size_t fallbacks = 0;  // type missing from dict, original kept
};

// One entity-swapped training sample. Draws same-type surfaces uniformly
// from `dict`, excluding the original surface whenever an alternative
// exists. A type absent from the dict keeps the original surface and bumps
// `stats->fallbacks`.
Sample sample_augmented(const Sample& s, const EntityDict& dict, Rng& rng,
                        AugmentStats* stats = nullptr);

struct CandidateOptions {
  // Sample (subj, obj) pairs without replacement; k capped at the number of
  // distinct pairs.
  bool distinct = false;
};

// k replacement candidates for one sample. Throws if the pool is missing
// either entity type. Identity surfaces are excluded per axis whenever the
// pool offers an alternative.
std::vector<Candidate> generate_candidates(const Sample& s, const EntityDict& pool,
                                           std::size_t k, Rng& rng,
                                           const CandidateOptions& opts = {});

}  // namespace dreb
