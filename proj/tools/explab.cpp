// explab: runs one of the desk-scale experiments and writes CSV/SVG artifacts.
//
//   explab <gp-compare|pendulum-budget|pendulum-fixed> --config <path> --out <dir> [--seed N] [--jobs K]
//
// EXPLAB_OUT and EXPLAB_JOBS stand in for --out and --jobs when those flags
// are absent. Exit codes: 0 success, 2 configuration error, 3 experiment failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "edagger/common/errors.hpp"
#include "edagger/exp/config.hpp"
#include "edagger/exp/experiments.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitFailure = 3;

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace edagger;

  CLI::App app{"EnsembleDAgger desk-scale experiment runner"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  for (const char* name : {"gp-compare", "pendulum-budget", "pendulum-fixed"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed override");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  exp::ExperimentConfig config;
  try {
    const auto kind = exp::parse_experiment_kind(app.get_subcommands().front()->get_name());
    config = exp::load_config(config_path, kind);
    if (seed) config.master_seed = *seed;
    if (!jobs) {
      if (const auto e = env("EXPLAB_JOBS")) {
        try {
          jobs = std::stoul(*e);
        } catch (const std::exception&) {
          throw ConfigError("EXPLAB_JOBS must be a positive integer");
        }
      }
    }
    if (jobs) config.jobs = *jobs;
    if (out_dir.empty()) out_dir = env("EXPLAB_OUT").value_or(config.output_dir.string());
    if (out_dir.empty()) throw ConfigError("no output directory: pass --out or set EXPLAB_OUT");
    config.output_dir = out_dir;
    config.validate();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    exp::run_experiment(config, config.output_dir);
  } catch (const std::exception& e) {
    std::cerr << "experiment failed: " << e.what() << '\n';
    return kExitFailure;
  }
  std::cout << "wrote " << config.output_dir.string() << '\n';
  return 0;
}
