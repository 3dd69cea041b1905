#include "edagger/exp/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "edagger/common/hash.hpp"
#include "edagger/simd/kernels.hpp"
#include "json.hpp"

namespace edagger::exp {

namespace fs = std::filesystem;
using nlohmann::json;

RunManifest build_manifest(const ExperimentConfig& config, const fs::path& out_dir, double wall_clock_seconds) {
  RunManifest m;
  m.experiment = std::string(to_string(config.kind));
  m.config_hash = hex64(config.config_hash());
  m.master_seed = config.master_seed;
  m.wall_clock_seconds = wall_clock_seconds;
  const fs::path cache = fs::weakly_canonical(config.pendulum.basin_cache_dir.empty()
                                                  ? out_dir / "cache"
                                                  : config.pendulum.basin_cache_dir);
  for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), out_dir);
    if (rel == "manifest.json") continue;
    const fs::path canonical = fs::weakly_canonical(entry.path());
    const auto [end, _] = std::mismatch(cache.begin(), cache.end(), canonical.begin(), canonical.end());
    if (end == cache.end()) continue;
    m.checksums[rel.generic_string()] = hex64(fnv1a64_file(entry.path()));
  }
  m.versions["explab"] = kExplabVersion;
  m.versions["compiler"] = __VERSION__;
  m.versions["kernel_backend"] = std::string(simd::to_string(simd::active_kernels().backend));
  return m;
}

void write_manifest(const fs::path& path, const RunManifest& m) {
  const json j{{"experiment", m.experiment},   {"config_hash", m.config_hash},
               {"master_seed", m.master_seed}, {"checksums", m.checksums},
               {"wall_clock_seconds", m.wall_clock_seconds}, {"versions", m.versions}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

RunManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const json j = json::parse(in);
  RunManifest m;
  m.experiment = j.at("experiment").get<std::string>();
  m.config_hash = j.at("config_hash").get<std::string>();
  m.master_seed = j.at("master_seed").get<std::uint64_t>();
  m.checksums = j.at("checksums").get<std::map<std::string, std::string>>();
  m.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
  m.versions = j.at("versions").get<std::map<std::string, std::string>>();
  return m;
}

}  // namespace edagger::exp
