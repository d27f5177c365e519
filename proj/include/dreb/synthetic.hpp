#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dreb/io.hpp"
#include "dreb/types.hpp"

namespace dreb {

// Planted-bias corpus: the relation label is a deterministic function of
// the sentence template alone, while subject entities co-occur with an
// assigned label at `bias_rate` in train/dev/test_biased and independently
// of the label in test_debiased. Ground truth for every debiasing check in
// the toolkit.
struct GeneratorSpec {
  std::size_t n_labels = 4;
  std::size_t n_entities_per_type = 8;
  std::size_t templates_per_label = 2;
  double bias_rate = 0.9;
  std::size_t train_size = 2000;
  std::size_t dev_size = 500;
  std::size_t test_size = 500;  // each of test_biased / test_debiased
  std::uint64_t seed = 0;

  void validate() const;
  static GeneratorSpec from_json_file(const std::filesystem::path& path);
};

struct GeneratedCorpus {
  Dataset train;
  Dataset dev;
  Dataset test_biased;
  Dataset test_debiased;
  std::vector<PoolRecord> pool;
  // Which label each subject surface was planted on (key: joined surface).
  std::map<std::string, std::string> subject_assignment;
};

GeneratedCorpus generate(const GeneratorSpec& spec);

}  // namespace dreb
