#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "edagger/exp/experiments.hpp"
#include "edagger/exp/manifest.hpp"
#include "edagger/simd/kernels.hpp"

namespace edagger::exp {

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / n;
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return s;
}

Summary summarize_rate(const std::vector<bool>& flags) {
  Summary s;
  if (flags.empty()) return s;
  const double n = static_cast<double>(flags.size());
  double hits = 0.0;
  for (bool f : flags) hits += f ? 1.0 : 0.0;
  s.mean = hits / n;
  s.std_error = std::sqrt(s.mean * (1.0 - s.mean) / n);
  return s;
}

void run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  simd::set_active_backend(simd::parse_backend(config.kernel_backend));
  std::filesystem::create_directories(out_dir);
  const auto start = std::chrono::steady_clock::now();
  switch (config.kind) {
    case ExperimentKind::GpCompare:
      run_gp_compare(config, out_dir);
      break;
    case ExperimentKind::PendulumBudget:
      run_pendulum_budget(config, out_dir);
      break;
    case ExperimentKind::PendulumFixed:
      run_pendulum_fixed(config, out_dir);
      break;
  }
  {
    std::ofstream cfg(out_dir / "config.effective.json", std::ios::binary);
    if (!cfg) throw std::runtime_error("cannot write config.effective.json");
    cfg << config.to_json_text() << '\n';
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(out_dir / "manifest.json", build_manifest(config, out_dir, seconds));
}

}  // namespace edagger::exp
