#include "dreb/types.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace dreb {

TokenList Sample::subj_surface() const {
  return TokenList(tokens.begin() + static_cast<std::ptrdiff_t>(subj_span.start),
                   tokens.begin() + static_cast<std::ptrdiff_t>(subj_span.end));
}

TokenList Sample::obj_surface() const {
  return TokenList(tokens.begin() + static_cast<std::ptrdiff_t>(obj_span.start),
                   tokens.begin() + static_cast<std::ptrdiff_t>(obj_span.end));
}

bool RelationSchema::has_label(const std::string& label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

std::size_t RelationSchema::label_index(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) {
    throw ValidationError("unknown relation label '" + label + "'");
  }
  return static_cast<std::size_t>(it - labels.begin());
}

void RelationSchema::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw ValidationError("duplicate label '" + l + "' in schema");
    }
  }
  if (!negative_label.empty() && !has_label(negative_label)) {
    throw ValidationError("negative label '" + negative_label +
                          "' is not a member of the schema");
  }
}

void validate_sample(const Sample& s, const RelationSchema* schema) {
  auto check_span = [&](const Span& sp, const char* name) {
    if (sp.start >= sp.end || sp.end > s.tokens.size()) {
      std::ostringstream os;
      os << "sample '" << s.id << "': " << name << " span [" << sp.start << ", "
         << sp.end << ") out of range for " << s.tokens.size() << " tokens";
      throw ValidationError(os.str());
    }
  };
  check_span(s.subj_span, "subject");
  check_span(s.obj_span, "object");
  if (s.subj_span.overlaps(s.obj_span)) {
    throw ValidationError("sample '" + s.id + "': subject and object spans overlap");
  }
  if (schema != nullptr && !schema->has_label(s.relation)) {
    throw ValidationError("sample '" + s.id + "': relation '" + s.relation +
                          "' not in schema");
  }
}

void Dataset::validate() const {
  schema.validate();
  for (const auto& s : samples) {
    validate_sample(s, &schema);
  }
}

std::map<std::string, std::size_t> relation_histogram(const Dataset& d) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : d.samples) {
    ++counts[s.relation];
  }
  return counts;
}

std::string join_tokens(const TokenList& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace dreb
