#include "dreb/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace dreb {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open '" + path.string() + "' for reading");
  }
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  return out;
}

TokenList tokens_from_json(const json& arr, const std::string& where) {
  if (!arr.is_array()) {
    throw ParseError(where + ": token field is not an array");
  }
  TokenList out;
  out.reserve(arr.size());
  for (const auto& t : arr) {
    if (!t.is_string()) {
      throw ParseError(where + ": non-string token");
    }
    out.push_back(t.get<std::string>());
  }
  return out;
}

const json& require_field(const json& rec, const char* key, const std::string& where) {
  auto it = rec.find(key);
  if (it == rec.end()) {
    throw ParseError(where + ": missing field '" + std::string(key) + "'");
  }
  return *it;
}

std::size_t size_field(const json& rec, const char* key, const std::string& where) {
  const json& v = require_field(rec, key, where);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ParseError(where + ": field '" + std::string(key) +
                     "' is not a non-negative integer");
  }
  return static_cast<std::size_t>(v.get<long long>());
}

std::string string_field(const json& rec, const char* key, const std::string& where) {
  const json& v = require_field(rec, key, where);
  if (!v.is_string()) {
    throw ParseError(where + ": field '" + std::string(key) + "' is not a string");
  }
  return v.get<std::string>();
}

Sample sample_from_record(const json& rec, DatasetFormat format,
                          const std::string& where) {
  if (!rec.is_object()) {
    throw ParseError(where + ": record is not an object");
  }
  Sample s;
  s.id = string_field(rec, "id", where);
  const char* token_key = format == DatasetFormat::Jsonl ? "tokens" : "token";
  s.tokens = tokens_from_json(require_field(rec, token_key, where), where);
  s.subj_span.start = size_field(rec, "subj_start", where);
  s.subj_span.end = size_field(rec, "subj_end", where);
  s.obj_span.start = size_field(rec, "obj_start", where);
  s.obj_span.end = size_field(rec, "obj_end", where);
  if (format == DatasetFormat::TacredJson) {
    // Upstream spans are end-inclusive.
    s.subj_span.end += 1;
    s.obj_span.end += 1;
  }
  s.subj_type = string_field(rec, "subj_type", where);
  s.obj_type = string_field(rec, "obj_type", where);
  s.relation = string_field(rec, "relation", where);
  return s;
}

json sample_to_record(const Sample& s, DatasetFormat format) {
  json rec;
  rec["id"] = s.id;
  rec[format == DatasetFormat::Jsonl ? "tokens" : "token"] = s.tokens;
  rec["subj_start"] = s.subj_span.start;
  rec["subj_end"] =
      format == DatasetFormat::Jsonl ? s.subj_span.end : s.subj_span.end - 1;
  rec["obj_start"] = s.obj_span.start;
  rec["obj_end"] =
      format == DatasetFormat::Jsonl ? s.obj_span.end : s.obj_span.end - 1;
  rec["subj_type"] = s.subj_type;
  rec["obj_type"] = s.obj_type;
  rec["relation"] = s.relation;
  return rec;
}

}  // namespace

DatasetFormat format_from_name(const std::string& name) {
  if (name == "jsonl") return DatasetFormat::Jsonl;
  if (name == "tacred-json") return DatasetFormat::TacredJson;
  throw ConfigError("unknown dataset format '" + name + "'");
}

RelationSchema infer_schema(const std::vector<Sample>& samples) {
  RelationSchema schema;
  for (const auto& s : samples) {
    if (!schema.has_label(s.relation)) {
      schema.labels.push_back(s.relation);
    }
  }
  if (schema.has_label("no_relation")) {
    schema.negative_label = "no_relation";
  }
  return schema;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     const std::string& split_name) {
  std::ifstream in = open_input(path);
  std::vector<Sample> samples;

  if (format == DatasetFormat::Jsonl) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::ostringstream where;
      where << path.filename().string() << ":" << line_no;
      json rec = json::parse(line, nullptr, false);
      if (rec.is_discarded()) {
        throw ParseError(where.str() + ": invalid json");
      }
      samples.push_back(sample_from_record(rec, format, where.str()));
    }
  } else {
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) {
      throw ParseError(path.string() + ": invalid json");
    }
    if (!doc.is_array()) {
      throw ParseError(path.string() + ": expected a top-level array");
    }
    for (std::size_t i = 0; i < doc.size(); ++i) {
      std::ostringstream where;
      where << path.filename().string() << " record " << i;
      samples.push_back(sample_from_record(doc[i], format, where.str()));
    }
  }

  Dataset d;
  d.samples = std::move(samples);
  d.schema = infer_schema(d.samples);
  d.split_name = split_name.empty() ? path.stem().string() : split_name;
  d.validate();
  return d;
}

void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  DatasetFormat format) {
  std::ofstream out = open_output(path);
  if (format == DatasetFormat::Jsonl) {
    for (const auto& s : d.samples) {
      out << sample_to_record(s, format).dump() << "\n";
    }
  } else {
    json arr = json::array();
    for (const auto& s : d.samples) {
      arr.push_back(sample_to_record(s, format));
    }
    out << arr.dump(2) << "\n";
  }
}

std::vector<PoolRecord> load_pool_records(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::vector<PoolRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::ostringstream where;
    where << path.filename().string() << ":" << line_no;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded()) {
      throw ParseError(where.str() + ": invalid json");
    }
    PoolRecord pr;
    pr.surface = tokens_from_json(require_field(rec, "surface", where.str()),
                                  where.str());
    if (pr.surface.empty()) {
      throw ParseError(where.str() + ": empty surface");
    }
    pr.type = string_field(rec, "type", where.str());
    pr.source = rec.value("source", std::string{});
    records.push_back(std::move(pr));
  }
  return records;
}

void save_pool_records(const std::vector<PoolRecord>& records,
                       const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  for (const auto& r : records) {
    json rec;
    rec["surface"] = r.surface;
    rec["type"] = r.type;
    rec["source"] = r.source;
    out << rec.dump() << "\n";
  }
}

std::map<std::string, std::string> load_type_map(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ParseError(path.string() + ": type map must be a json object");
  }
  std::map<std::string, std::string> out;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!it.value().is_string()) {
      throw ParseError(path.string() + ": type map values must be strings");
    }
    out[it.key()] = it.value().get<std::string>();
  }
  return out;
}

}  // namespace dreb
