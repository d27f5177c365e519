#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dreb {

using TokenList = std::vector<std::string>;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// Malformed input files (bad JSON, missing fields). Messages carry the
// record index or line number.
struct ParseError : Error {
  using Error::Error;
};
// Structurally valid input that violates a data invariant. Messages name
// the offending sample id.
struct ValidationError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// Half-open token interval [start, end).
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool overlaps(const Span& o) const { return start < o.end && o.start < end; }
  friend bool operator==(const Span&, const Span&) = default;
};

// One relation-extraction instance. Spans are end-exclusive indices into
// `tokens`; formats with end-inclusive spans are converted at the IO
// boundary.
struct Sample {
  std::string id;
  TokenList tokens;
  Span subj_span;
  Span obj_span;
  std::string subj_type;
  std::string obj_type;
  std::string relation;

  TokenList subj_surface() const;
  TokenList obj_surface() const;
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct RelationSchema {
  std::vector<std::string> labels;
  // Conventionally "no_relation"; empty when the dataset declares none.
  std::string negative_label;

  bool has_label(const std::string& label) const;
  std::size_t label_index(const std::string& label) const;
  void validate() const;
  friend bool operator==(const RelationSchema&, const RelationSchema&) = default;
};

struct Dataset {
  std::vector<Sample> samples;
  RelationSchema schema;
  std::string split_name;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  void validate() const;
};

// Throws ValidationError naming the sample. `schema` may be null when the
// sample is checked before a schema exists.
void validate_sample(const Sample& s, const RelationSchema* schema);

std::map<std::string, std::size_t> relation_histogram(const Dataset& d);

std::string join_tokens(const TokenList& tokens);

}  // namespace dreb
