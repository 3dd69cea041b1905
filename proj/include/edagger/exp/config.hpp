#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edagger/analysis/analysis.hpp"
#include "edagger/dagger/dagger.hpp"
#include "edagger/gp/gp.hpp"
#include "edagger/pendulum/grid.hpp"
#include "edagger/simd/kernels.hpp"

namespace edagger::exp {

enum class ExperimentKind { GpCompare, PendulumBudget, PendulumFixed };

std::string_view to_string(ExperimentKind kind);
/// "gp-compare", "pendulum-budget" or "pendulum-fixed".
ExperimentKind parse_experiment_kind(std::string_view name);

struct NamedRule {
  std::string name;
  dagger::DecisionRule rule;
};

/// Everything the two pendulum experiments share.
struct PendulumSetup {
  dagger::PendulumEnv env;
  pendulum::StateGrid grid;
  dagger::EnsembleSpec ensemble;
  nn::TrainConfig train;
  std::size_t dagger_epochs = 6;
  std::size_t trajectories_per_epoch = 1;
  bool warm_start = false;
  /// Empty means <output>/cache.
  std::filesystem::path basin_cache_dir;
  /// Simulate the novice basin on every cell rather than only on expert-basin
  /// cells. Learning performance is the same either way.
  bool full_novice_basin = false;
  /// Network precision for novice basins.
  analysis::Precision basin_precision = analysis::Precision::Single;
};

struct BudgetSettings {
  std::vector<analysis::ThresholdKind> rules = {analysis::ThresholdKind::Doubt,
                                                analysis::ThresholdKind::Discrepancy};
  double v0 = 0.02;
  double dv = 0.02;
  analysis::BisectionOptions bisection;
  /// Novice basins are computed for the first this-many repetitions.
  std::size_t novice_basin_repetitions = 1;

  /// Volume budget of rule-gated epoch e >= 1: v0 + (e - 1) * dv, capped at 1.
  double budget(std::size_t epoch) const;
};

struct GpCompareSettings {
  std::size_t train_points = 8;
  pendulum::Interval train_range{-1.0, 1.0};
  pendulum::Interval query_range{-1.5, 1.5};
  std::size_t query_points = 301;
  pendulum::Interval far_range{1.2, 1.5};  // in |x|

  gp::GpHyperparameters gp_init{10.0, 1.0, 1e-10};
  gp::GpFitOptions gp_fit;

  std::vector<std::size_t> hidden = {128, 64, 64, 64};
  // tanh underfits the eight points within 300 epochs at this learning rate.
  nn::Activation activation = nn::Activation::Relu;
  std::size_t members = 10;
  std::size_t batch_size = 4;
  std::size_t vanilla_epochs = 300;
  double vanilla_learning_rate = 1e-3;
  std::size_t nll_epochs = 2400;
  double nll_learning_rate = 1e-4;
  std::size_t mc_epochs = 2400;
  double mc_learning_rate = 1e-3;
  double mc_keep_prob = 0.75;
  std::size_t mc_samples = 100;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::PendulumFixed;
  std::uint64_t master_seed = 0;
  std::vector<std::uint64_t> per_epoch_ic;
  std::size_t repetitions = 1;
  std::size_t jobs = 1;
  std::string kernel_backend = "auto";
  std::filesystem::path output_dir;

  PendulumSetup pendulum;
  std::vector<NamedRule> rules;  // pendulum-fixed
  BudgetSettings budget;
  GpCompareSettings gp_compare;

  /// Hash of the fields that influence data files (not jobs or paths).
  std::uint64_t config_hash() const;
  /// Effective configuration, every field spelled out.
  std::string to_json_text() const;

  void validate() const;
};

/// Paper defaults for `kind`.
ExperimentConfig default_config(ExperimentKind kind);

/// Parses a JSON document over the defaults of its experiment kind. Unknown
/// keys and out-of-range values raise ConfigError. `expected` (from the
/// command line) fills in or must agree with the "experiment" field.
ExperimentConfig parse_config(std::string_view json_text, std::optional<ExperimentKind> expected = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> expected = std::nullopt);

/// Seeds of repetition `rep` for rule slot `rule_id`: initial conditions
/// depend only on (master, rep); network and decision streams on
/// (master, rule_id, rep).
dagger::DaggerSeeds run_seeds(const ExperimentConfig& config, std::size_t rule_id, std::size_t rep);

}  // namespace edagger::exp
