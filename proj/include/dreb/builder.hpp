#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "dreb/augment.hpp"
#include "dreb/bias_eval.hpp"
#include "dreb/lm.hpp"
#include "dreb/types.hpp"

namespace dreb {

enum class FailPolicy { KeepOriginal, Drop, Error };

FailPolicy fail_policy_from_name(const std::string& name);
const char* fail_policy_name(FailPolicy p);

struct BuildPolicy {
  std::size_t k = 8;
  // Lowest-bias candidates that survive to the perplexity stage; 0 means
  // the default ceil(k / 2).
  std::size_t bias_top_m = 0;
  std::uint64_t seed = 0;
  FailPolicy fail_policy = FailPolicy::KeepOriginal;
  bool distinct = false;

  std::size_t effective_top_m() const;
  void validate() const;
};

struct BuildRecord {
  std::string source_id;
  Replacement subj_replacement;
  Replacement obj_replacement;
  double bias_score = 0.0;
  double log_ppl = 0.0;
  bool fallback = false;  // pool could not cover the sample's types
  bool dropped = false;
};

struct BuildReport {
  std::vector<BuildRecord> records;
  double mean_bias_original = 0.0;
  double mean_bias_chosen = 0.0;
  double mean_log_ppl = 0.0;
  std::size_t fallback_count = 0;
  std::size_t dropped_count = 0;
  bool histogram_preserved = false;

  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;
};

struct DebiasedSample {
  Sample sample;
  BuildRecord record;
};

// One sample through the two-stage workflow: k same-type candidates, keep
// the bias_top_m lowest bias scores, return the lowest-perplexity survivor.
DebiasedSample debias_sample(const Sample& s, const EntityDict& pool,
                             const BiasEvaluator& bias_ev, const LanguageModel& lm,
                             const BuildPolicy& policy, Rng& rng);

// Whole-benchmark pass. Output keeps input size, order, and the exact
// per-label histogram (under the keep-original fail policy); deterministic
// for a fixed policy.seed regardless of worker count.
std::pair<Dataset, BuildReport> build_benchmark(const Dataset& test,
                                                const EntityDict& pool,
                                                const BiasEvaluator& bias_ev,
                                                const LanguageModel& lm,
                                                const BuildPolicy& policy,
                                                std::size_t workers = 1);

}  // namespace dreb
