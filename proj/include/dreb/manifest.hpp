#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace dreb {

// FNV-1a over the file bytes; the provenance hash used to chain pipeline
// stages together.
std::uint64_t fnv1a64_file(const std::filesystem::path& path);
std::string hash_string(std::uint64_t h);

// Provenance record written next to every command's outputs.
struct RunManifest {
  std::string command;
  nlohmann::json resolved_config;
  std::uint64_t seed = 0;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  double wall_clock_seconds = 0.0;

  // Hashes inputs/outputs at write time.
  void write(const std::filesystem::path& path) const;
};

}  // namespace dreb
