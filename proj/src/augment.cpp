#include "dreb/augment.hpp"

#include <algorithm>

namespace dreb {

EntityDict EntityDict::from_dataset(const Dataset& d) {
  if (d.empty()) {
    throw ValidationError("cannot build an entity dictionary from an empty dataset");
  }
  EntityDict dict(DictSource::TrainInternal);
  for (const auto& s : d.samples) {
    dict.add(s.subj_type, s.subj_surface());
    dict.add(s.obj_type, s.obj_surface());
  }
  return dict;
}

EntityDict EntityDict::from_pool_records(
    const std::vector<PoolRecord>& records,
    const std::map<std::string, std::string>* type_map) {
  EntityDict dict(DictSource::ExternalPool);
  for (const auto& r : records) {
    std::string type = r.type;
    if (type_map != nullptr) {
      auto it = type_map->find(type);
      if (it != type_map->end()) type = it->second;
    }
    dict.add(type, r.surface);
  }
  return dict;
}

void EntityDict::add(const std::string& type, const TokenList& surface) {
  if (surface.empty()) {
    throw ValidationError("empty entity surface for type '" + type + "'");
  }
  auto& list = by_type_[type];
  for (const auto& existing : list) {
    if (existing == surface) return;
  }
  list.push_back(surface);
}

bool EntityDict::has_type(const std::string& type) const {
  return by_type_.count(type) != 0;
}

const std::vector<TokenList>& EntityDict::surfaces(const std::string& type) const {
  auto it = by_type_.find(type);
  if (it == by_type_.end()) {
    throw ValidationError("entity type '" + type + "' not present in dictionary");
  }
  return it->second;
}

Sample replace_entities(const Sample& s, const TokenList& new_subj,
                        const TokenList& new_obj) {
  if (new_subj.empty() || new_obj.empty()) {
    throw ValidationError("replacement surfaces must be non-empty");
  }

  const bool subj_first = s.subj_span.start < s.obj_span.start;
  const Span& first = subj_first ? s.subj_span : s.obj_span;
  const Span& second = subj_first ? s.obj_span : s.subj_span;
  const TokenList& first_new = subj_first ? new_subj : new_obj;
  const TokenList& second_new = subj_first ? new_obj : new_subj;

  Sample out;
  out.id = s.id;
  out.subj_type = s.subj_type;
  out.obj_type = s.obj_type;
  out.relation = s.relation;

  TokenList& toks = out.tokens;
  toks.reserve(s.tokens.size() + first_new.size() + second_new.size());
  toks.insert(toks.end(), s.tokens.begin(),
              s.tokens.begin() + static_cast<std::ptrdiff_t>(first.start));
  Span first_out{toks.size(), toks.size() + first_new.size()};
  toks.insert(toks.end(), first_new.begin(), first_new.end());
  toks.insert(toks.end(), s.tokens.begin() + static_cast<std::ptrdiff_t>(first.end),
              s.tokens.begin() + static_cast<std::ptrdiff_t>(second.start));
  Span second_out{toks.size(), toks.size() + second_new.size()};
  toks.insert(toks.end(), second_new.begin(), second_new.end());
  toks.insert(toks.end(), s.tokens.begin() + static_cast<std::ptrdiff_t>(second.end),
              s.tokens.end());

  out.subj_span = subj_first ? first_out : second_out;
  out.obj_span = subj_first ? second_out : first_out;

  // Cannot overlap for non-overlapping inputs; guard the invariant anyway.
  if (out.subj_span.overlaps(out.obj_span)) {
    throw ValidationError("sample '" + s.id + "': replacement produced overlapping spans");
  }
  validate_sample(out, nullptr);
  return out;
}

namespace {

// Uniform draw from `list` excluding `original` whenever an alternative
// exists. Returns the index drawn.
std::size_t draw_surface(const std::vector<TokenList>& list, const TokenList& original,
                         Rng& rng) {
  std::ptrdiff_t original_at = -1;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (list[i] == original) {
      original_at = static_cast<std::ptrdiff_t>(i);
      break;
    }
  }
  if (original_at < 0) {
    return rng.uniform_index(list.size());
  }
  if (list.size() == 1) {
    return 0;  // no alternative
  }
  std::size_t idx = rng.uniform_index(list.size() - 1);
  if (idx >= static_cast<std::size_t>(original_at)) ++idx;
  return idx;
}

}  // namespace

Sample sample_augmented(const Sample& s, const EntityDict& dict, Rng& rng,
                        AugmentStats* stats) {
  if (stats != nullptr) ++stats->draws;
  if (!dict.has_type(s.subj_type) || !dict.has_type(s.obj_type)) {
    // Missing type: the sample stands in as its own augmentation so the
    // batch stays aligned; callers can see how often via stats.
    if (stats != nullptr) ++stats->fallbacks;
    return s;
  }
  const TokenList subj_orig = s.subj_surface();
  const TokenList obj_orig = s.obj_surface();
  const auto& subj_list = dict.surfaces(s.subj_type);
  const auto& obj_list = dict.surfaces(s.obj_type);
  const TokenList& new_subj = subj_list[draw_surface(subj_list, subj_orig, rng)];
  const TokenList& new_obj = obj_list[draw_surface(obj_list, obj_orig, rng)];
  return replace_entities(s, new_subj, new_obj);
}

std::vector<Candidate> generate_candidates(const Sample& s, const EntityDict& pool,
                                           std::size_t k, Rng& rng,
                                           const CandidateOptions& opts) {
  if (k == 0) {
    throw ConfigError("candidate count k must be positive");
  }
  for (const std::string* type : {&s.subj_type, &s.obj_type}) {
    if (!pool.has_type(*type) || pool.surfaces(*type).empty()) {
      throw ValidationError("entity pool has no surfaces for type '" + *type + "'");
    }
  }

  const TokenList subj_orig = s.subj_surface();
  const TokenList obj_orig = s.obj_surface();

  // Per-axis choice lists with the identity surface removed when an
  // alternative exists.
  auto choices = [](const std::vector<TokenList>& list, const TokenList& original) {
    std::vector<const TokenList*> out;
    for (const auto& surf : list) {
      if (surf != original) out.push_back(&surf);
    }
    if (out.empty()) {
      for (const auto& surf : list) out.push_back(&surf);
    }
    return out;
  };
  const std::vector<const TokenList*> subj_choices =
      choices(pool.surfaces(s.subj_type), subj_orig);
  const std::vector<const TokenList*> obj_choices =
      choices(pool.surfaces(s.obj_type), obj_orig);

  const std::string origin =
      pool.source() == DictSource::ExternalPool ? "pool" : "train-dict";

  auto make_candidate = [&](const TokenList& subj, const TokenList& obj) {
    Candidate c;
    c.sample = replace_entities(s, subj, obj);
    c.source_id = s.id;
    c.subj_replacement = {subj, subj == subj_orig ? "original" : origin};
    c.obj_replacement = {obj, obj == obj_orig ? "original" : origin};
    return c;
  };

  std::vector<Candidate> out;
  if (opts.distinct) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(subj_choices.size() * obj_choices.size());
    for (std::size_t i = 0; i < subj_choices.size(); ++i) {
      for (std::size_t j = 0; j < obj_choices.size(); ++j) {
        pairs.emplace_back(i, j);
      }
    }
    const std::size_t take = std::min(k, pairs.size());
    // Partial Fisher-Yates: the first `take` entries are a uniform draw
    // without replacement.
    for (std::size_t i = 0; i < take; ++i) {
      std::size_t j = i + rng.uniform_index(pairs.size() - i);
      std::swap(pairs[i], pairs[j]);
      out.push_back(
          make_candidate(*subj_choices[pairs[i].first], *obj_choices[pairs[i].second]));
    }
  } else {
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
      const TokenList& subj = *subj_choices[rng.uniform_index(subj_choices.size())];
      const TokenList& obj = *obj_choices[rng.uniform_index(obj_choices.size())];
      out.push_back(make_candidate(subj, obj));
    }
  }
  return out;
}

}  // namespace dreb
