#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edagger/analysis/analysis.hpp"
#include "edagger/dagger/dagger.hpp"
#include "edagger/exp/config.hpp"
#include "edagger/gp/gp.hpp"

namespace edagger::exp {

/// Mean and standard error of a sample.
struct Summary {
  double mean = 0.0;
  double std_error = 0.0;
};

/// stderr from the (n-1) sample standard deviation; 0 for n < 2.
Summary summarize(const std::vector<double>& values);
/// Binomial stderr sqrt(p (1 - p) / n) for 0/1 outcomes.
Summary summarize_rate(const std::vector<bool>& flags);

// ---- gp-compare ----------------------------------------------------------

struct ModelCurve {
  std::string model;
  bool ok = false;
  std::string error;
  std::vector<double> mean;
  std::vector<double> std_raw;
  std::vector<double> std_scaled;
  double scale = 1.0;        // std_scaled / std_raw
  double train_rmse = 0.0;   // of the mean at the training inputs
  double std_far = 0.0;      // mean std_raw over |x| in far_range
  double std_hull = 0.0;     // mean std_raw over the training inputs' hull
};

struct GpCompareResult {
  std::vector<double> train_x;
  std::vector<double> train_y;
  std::vector<double> query_x;
  gp::GpHyperparameters gp_hyper;
  std::vector<ModelCurve> models;  // gp, vanilla_ensemble, nll_ensemble, mc_dropout

  const ModelCurve& model(const std::string& name) const;
};

/// f(x) = sin(pi x) + 0.2 sin(4 pi x)
double gp_compare_target(double x);

GpCompareResult run_gp_compare(const ExperimentConfig& config, const std::filesystem::path& out_dir);

// ---- pendulum-fixed ------------------------------------------------------

struct FixedRun {
  std::size_t rule = 0;
  std::size_t repetition = 0;
  std::vector<analysis::MetricsRecord> metrics;  // epochs 1..K
  std::vector<dagger::EpochRecord> records;      // epochs 0..K
};

struct FixedResult {
  std::vector<std::string> rule_names;
  std::size_t epochs = 0;
  std::size_t repetitions = 0;
  std::vector<FixedRun> runs;  // rule-major

  const FixedRun& run(std::size_t rule, std::size_t rep) const { return runs[rule * repetitions + rep]; }
  /// Per-repetition values of one metric at one epoch (1-based).
  std::vector<double> learning_performance(std::size_t rule, std::size_t epoch) const;
  std::vector<double> permitted_volume(std::size_t rule, std::size_t epoch) const;
  std::vector<bool> failures(std::size_t rule, std::size_t epoch) const;
};

FixedResult run_pendulum_fixed(const ExperimentConfig& config, const std::filesystem::path& out_dir);

// ---- pendulum-budget -----------------------------------------------------

struct BudgetEpoch {
  std::size_t rule = 0;  // index into config.budget.rules
  std::size_t repetition = 0;
  std::size_t epoch = 0;
  double target_volume = 0.0;
  double threshold = 0.0;
  double permitted_volume = 0.0;
  bool infeasible = false;
  std::size_t permitted_cells = 0;
  std::optional<double> mean_nearest_distance;
  std::optional<double> learning_performance;
  dagger::EpochRecord record;
};

struct BudgetResult {
  std::vector<analysis::ThresholdKind> rules;
  std::size_t repetitions = 0;
  std::vector<BudgetEpoch> epochs;  // rule-gated epochs only

  /// Nearest-dataset distance pooled over every permitted cell of epochs 1..K
  /// of one run; nullopt when no cell was permitted.
  std::optional<double> pooled_distance(std::size_t rule, std::size_t rep) const;
};

BudgetResult run_pendulum_budget(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// Applies the kernel backend, runs the experiment, and writes
/// config.effective.json and manifest.json into out_dir.
void run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace edagger::exp
