#include "dreb/builder.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include "dreb/rng.hpp"

namespace dreb {

using nlohmann::json;

FailPolicy fail_policy_from_name(const std::string& name) {
  if (name == "keep-original") return FailPolicy::KeepOriginal;
  if (name == "drop") return FailPolicy::Drop;
  if (name == "error") return FailPolicy::Error;
  throw ConfigError("unknown fail policy '" + name + "'");
}

const char* fail_policy_name(FailPolicy p) {
  switch (p) {
    case FailPolicy::KeepOriginal:
      return "keep-original";
    case FailPolicy::Drop:
      return "drop";
    case FailPolicy::Error:
      return "error";
  }
  return "keep-original";
}

std::size_t BuildPolicy::effective_top_m() const {
  return bias_top_m == 0 ? (k + 1) / 2 : bias_top_m;
}

void BuildPolicy::validate() const {
  if (k == 0) {
    throw ConfigError("build policy: k must be positive");
  }
  if (effective_top_m() > k) {
    throw ConfigError("build policy: bias_top_m must lie in [1, k]");
  }
}

DebiasedSample debias_sample(const Sample& s, const EntityDict& pool,
                             const BiasEvaluator& bias_ev, const LanguageModel& lm,
                             const BuildPolicy& policy, Rng& rng) {
  policy.validate();

  if (!pool.has_type(s.subj_type) || !pool.has_type(s.obj_type)) {
    switch (policy.fail_policy) {
      case FailPolicy::Error:
        throw ValidationError("sample '" + s.id +
                              "': entity pool does not cover its types");
      case FailPolicy::Drop: {
        DebiasedSample out{s, {}};
        out.record.source_id = s.id;
        out.record.fallback = true;
        out.record.dropped = true;
        return out;
      }
      case FailPolicy::KeepOriginal: {
        DebiasedSample out{s, {}};
        out.record.source_id = s.id;
        out.record.subj_replacement = {s.subj_surface(), "original"};
        out.record.obj_replacement = {s.obj_surface(), "original"};
        out.record.bias_score = bias_ev.score(s);
        out.record.log_ppl = log_ppl(lm, s.tokens);
        out.record.fallback = true;
        return out;
      }
    }
  }

  CandidateOptions opts;
  opts.distinct = policy.distinct;
  std::vector<Candidate> candidates = generate_candidates(s, pool, policy.k, rng, opts);

  for (auto& c : candidates) {
    c.bias_score = bias_score(bias_ev, c);
  }

  // Stage 1: keep the top_m lowest bias scores, stable on candidate index.
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return *candidates[a].bias_score < *candidates[b].bias_score;
  });
  const std::size_t keep = std::min(policy.effective_top_m(), order.size());
  std::vector<std::size_t> survivors(order.begin(),
                                     order.begin() + static_cast<std::ptrdiff_t>(keep));
  // PPL stage ties break on the original candidate index.
  std::sort(survivors.begin(), survivors.end());

  // Stage 2: lowest perplexity among the survivors.
  std::vector<Candidate> pool_stage;
  pool_stage.reserve(survivors.size());
  for (std::size_t i : survivors) pool_stage.push_back(candidates[i]);
  const std::size_t winner = select_min_ppl(lm, pool_stage);
  const Candidate& chosen = pool_stage[winner];

  DebiasedSample out{chosen.sample, {}};
  out.record.source_id = s.id;
  out.record.subj_replacement = chosen.subj_replacement;
  out.record.obj_replacement = chosen.obj_replacement;
  out.record.bias_score = *chosen.bias_score;
  out.record.log_ppl = *chosen.log_ppl;
  return out;
}

std::pair<Dataset, BuildReport> build_benchmark(const Dataset& test,
                                                const EntityDict& pool,
                                                const BiasEvaluator& bias_ev,
                                                const LanguageModel& lm,
                                                const BuildPolicy& policy,
                                                std::size_t workers) {
  policy.validate();
  test.validate();

  const std::size_t n = test.size();
  std::vector<DebiasedSample> results(n);

  // Per-sample streams keyed on the sample index keep the output identical
  // for any worker count.
  auto run_range = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Rng rng(stream_seed(policy.seed, i));
      results[i] = debias_sample(test.samples[i], pool, bias_ev, lm, policy, rng);
    }
  };

  if (workers <= 1 || n < 2) {
    run_range(0, n);
  } else {
    const std::size_t t = std::min(workers, n);
    std::vector<std::thread> threads;
    threads.reserve(t);
    const std::size_t chunk = (n + t - 1) / t;
    for (std::size_t w = 0; w < t; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(begin + chunk, n);
      if (begin >= end) break;
      threads.emplace_back(run_range, begin, end);
    }
    for (auto& th : threads) th.join();
  }

  Dataset out;
  out.schema = test.schema;
  out.split_name = test.split_name + "-dreb";
  BuildReport report;
  report.records.reserve(n);

  double bias_orig_sum = 0.0;
  double bias_chosen_sum = 0.0;
  double ppl_sum = 0.0;
  std::size_t kept = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const DebiasedSample& r = results[i];
    report.records.push_back(r.record);
    if (r.record.dropped) {
      ++report.dropped_count;
      continue;
    }
    if (r.record.fallback) ++report.fallback_count;
    out.samples.push_back(r.sample);
    bias_orig_sum += bias_ev.score(test.samples[i]);
    bias_chosen_sum += r.record.bias_score;
    ppl_sum += r.record.log_ppl;
    ++kept;
  }
  if (kept > 0) {
    report.mean_bias_original = bias_orig_sum / static_cast<double>(kept);
    report.mean_bias_chosen = bias_chosen_sum / static_cast<double>(kept);
    report.mean_log_ppl = ppl_sum / static_cast<double>(kept);
  }
  report.histogram_preserved = relation_histogram(out) == relation_histogram(test);
  return {std::move(out), std::move(report)};
}

json BuildReport::to_json() const {
  json recs = json::array();
  for (const auto& r : records) {
    json rec;
    rec["source_id"] = r.source_id;
    rec["subj_replacement"] = r.subj_replacement.surface;
    rec["subj_origin"] = r.subj_replacement.origin;
    rec["obj_replacement"] = r.obj_replacement.surface;
    rec["obj_origin"] = r.obj_replacement.origin;
    rec["bias_score"] = r.bias_score;
    rec["log_ppl"] = r.log_ppl;
    rec["fallback"] = r.fallback;
    if (r.dropped) rec["dropped"] = true;
    recs.push_back(std::move(rec));
  }
  json doc;
  doc["samples"] = std::move(recs);
  doc["aggregate"] = {{"size", records.size()},
                      {"mean_bias_original", mean_bias_original},
                      {"mean_bias_chosen", mean_bias_chosen},
                      {"mean_log_ppl", mean_log_ppl},
                      {"fallback_count", fallback_count},
                      {"dropped_count", dropped_count},
                      {"histogram_preserved", histogram_preserved}};
  return doc;
}

void BuildReport::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out << to_json().dump(2) << "\n";
}

}  // namespace dreb
