#include "dreb/manifest.hpp"

#include <fstream>
#include <sstream>

#include "dreb/types.hpp"
#include "dreb/version.hpp"

namespace dreb {

using nlohmann::json;

std::uint64_t fnv1a64_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open '" + path.string() + "' for hashing");
  }
  std::uint64_t h = 1469598103934665603ULL;
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
  }
  return h;
}

std::string hash_string(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << h;
  return "fnv1a64:" + os.str();
}

void RunManifest::write(const std::filesystem::path& path) const {
  json doc;
  doc["tool"] = kToolName;
  doc["version"] = kToolVersion;
  doc["command"] = command;
  doc["seed"] = seed;
  doc["config"] = resolved_config;
  json ins = json::array();
  for (const auto& p : inputs) {
    ins.push_back({{"path", p.string()}, {"hash", hash_string(fnv1a64_file(p))}});
  }
  doc["inputs"] = std::move(ins);
  json outs = json::array();
  for (const auto& p : outputs) {
    outs.push_back({{"path", p.string()}, {"hash", hash_string(fnv1a64_file(p))}});
  }
  doc["outputs"] = std::move(outs);
  doc["wall_clock_seconds"] = wall_clock_seconds;

  std::ofstream out(path);
  if (!out) {
    throw Error("cannot open '" + path.string() + "' for writing");
  }
  out << doc.dump(2) << "\n";
}

}  // namespace dreb
