#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dreb/types.hpp"

namespace dreb {

// jsonl      — one record per line, keys {id, tokens, subj_start, subj_end,
//              obj_start, obj_end, subj_type, obj_type, relation}, spans
//              end-exclusive.
// tacred-json — single array of records with the upstream field names
//              ({token, subj_start, subj_end, ...}) and end-inclusive spans;
//              converted to end-exclusive on load.
enum class DatasetFormat { Jsonl, TacredJson };

DatasetFormat format_from_name(const std::string& name);

// Labels collected in first-occurrence order; negative_label is set to
// "no_relation" when present.
RelationSchema infer_schema(const std::vector<Sample>& samples);

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     const std::string& split_name = "");

void save_dataset(const Dataset& d, const std::filesystem::path& path,
                  DatasetFormat format);

// Entity-pool file: jsonl records {surface: token list, type: string,
// source: string}.
struct PoolRecord {
  TokenList surface;
  std::string type;
  std::string source;
  friend bool operator==(const PoolRecord&, const PoolRecord&) = default;
};

std::vector<PoolRecord> load_pool_records(const std::filesystem::path& path);
void save_pool_records(const std::vector<PoolRecord>& records,
                       const std::filesystem::path& path);

// Optional taxonomy alignment: json object {pool_type: dataset_type}.
std::map<std::string, std::string> load_type_map(const std::filesystem::path& path);

}  // namespace dreb
