#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "edagger/exp/config.hpp"

namespace edagger::exp {

struct RunManifest {
  std::string experiment;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::map<std::string, std::string> checksums;  // relative path -> FNV-1a 64 hex
  double wall_clock_seconds = 0.0;
  std::map<std::string, std::string> versions;
};

inline constexpr const char* kExplabVersion = "0.3.0";

/// Checksums every regular file under out_dir except manifest.json and the
/// basin cache.
RunManifest build_manifest(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                           double wall_clock_seconds);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace edagger::exp
