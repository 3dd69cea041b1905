#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "edagger/dagger/decision.hpp"
#include "edagger/nn/matrix.hpp"
#include "edagger/nn/train.hpp"
#include "edagger/pendulum/dynamics.hpp"
#include "edagger/pendulum/grid.hpp"
#include "edagger/pendulum/simulate.hpp"
#include "edagger/uq/ensemble.hpp"

namespace edagger::dagger {

/// Aggregated (observation, expert action) pairs. Append-only.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::size_t obs_dim, std::size_t act_dim) : observations_(0, obs_dim), actions_(0, act_dim) {}

  std::size_t size() const { return observations_.rows(); }
  bool empty() const { return size() == 0; }
  const nn::Matrix& observations() const { return observations_; }
  const nn::Matrix& actions() const { return actions_; }

  /// Throws ShapeError on a dimension mismatch or non-finite entries.
  void append(std::span<const double> observation, std::span<const double> action);
  void append(const Dataset& other);

 private:
  nn::Matrix observations_;
  nn::Matrix actions_;
};

/// Architecture and size of the novice ensemble.
struct EnsembleSpec {
  std::size_t members = 10;
  std::vector<std::size_t> hidden = {64, 64, 32, 32};
  nn::Activation activation = nn::Activation::Tanh;
  nn::OutputHead head = nn::OutputHead::PointEstimate;

  std::vector<std::size_t> widths(std::size_t obs_dim, std::size_t act_dim) const;
  void validate() const;
};

/// Where initial conditions are drawn from, uniformly.
struct PendulumEnv {
  pendulum::ExpertController expert;
  pendulum::Interval ic_theta{-0.6, 0.6};
  pendulum::Interval ic_theta_dot{-1.5, 1.5};
  /// End a trajectory once it reaches the convergence ball.
  bool stop_on_convergence = true;

  pendulum::PendulumState sample_initial(Rng& rng) const;
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::size_t trajectory_len = 0;  // transitions
  double novice_action_fraction = 0.0;
  bool failure = false;
  bool blew_up = false;
  std::size_t dataset_size = 0;  // after aggregation
};

struct EpochResult {
  EpochRecord record;
  pendulum::Trajectory trajectory;
  std::vector<Decision> decisions;
  Dataset delta;
};

/// Returns true when a finished trajectory counts as a failure.
using FailureCheck = std::function<bool(const pendulum::Trajectory&)>;

/// Rolls one trajectory from `x0`. With no novice (epoch 0) the expert acts
/// throughout. Every visited state that received an action is labeled with the
/// expert's action. A blow-up truncates the trajectory and marks a failure.
/// record.dataset_size is left at 0 for the caller to fill.
EpochResult run_epoch(const uq::EnsemblePolicy* novice, const PendulumEnv& env, const DecisionRule& rule,
                      std::size_t epoch, const pendulum::PendulumState& x0, Rng& decision_rng,
                      const FailureCheck& failure_check = {});

struct DaggerSeeds {
  /// Initial condition of trajectory j at epoch i comes from
  /// derive_seed(initial_conditions, {i, j}); independent of the rule.
  std::uint64_t initial_conditions = 0;
  /// Network initialization, shuffling and Vanilla draws.
  std::uint64_t run = 0;
  /// Optional explicit per-epoch IC seeds, used in place of the derivation.
  std::vector<std::uint64_t> per_epoch_ic;

  std::uint64_t ic_seed(std::size_t epoch, std::size_t trajectory) const;
};

struct DaggerConfig {
  std::size_t epochs = 6;  // rule-gated epochs after the expert-only epoch 0
  std::size_t trajectories_per_epoch = 1;
  DecisionRule rule = DoubtRule{};
  EnsembleSpec ensemble;
  nn::TrainConfig train;
  PendulumEnv env;
  DaggerSeeds seeds;
  bool warm_start = false;
  bool train_after_final_epoch = true;

  void validate() const;
};

/// Handed to DaggerHooks::on_epoch after each epoch's aggregation and retraining.
struct EpochSnapshot {
  std::size_t epoch;
  const DecisionRule& rule;
  const uq::EnsemblePolicy* acting_novice;   // null at epoch 0
  const uq::EnsemblePolicy* trained_novice;  // trained on the dataset through this epoch; may be null
  const std::vector<EpochResult>& results;   // one per trajectory
  const Dataset& dataset;
};

struct DaggerHooks {
  /// Overrides config.rule for epochs >= 1 (used by budgeted experiments).
  std::function<DecisionRule(std::size_t epoch, const uq::EnsemblePolicy& novice, const Dataset& dataset)>
      rule_for_epoch;
  FailureCheck failure_check;
  std::function<void(const EpochSnapshot&)> on_epoch;
};

struct DaggerResult {
  std::vector<EpochRecord> records;  // one per trajectory, epochs 0..K
  Dataset dataset;
  std::optional<uq::EnsemblePolicy> novice;
};

/// Expert-only epoch 0 followed by config.epochs rule-gated epochs. After each
/// epoch the dataset is aggregated and the novice retrained (from scratch
/// unless warm_start) on all of it.
DaggerResult run_dagger(const DaggerConfig& config, const DaggerHooks& hooks = {});

/// Trains a novice for the given epoch of a run.
uq::EnsemblePolicy train_novice(const DaggerConfig& config, std::size_t epoch, const Dataset& dataset,
                                const uq::EnsemblePolicy* warm);

/// Columns: epoch, trajectory_len, novice_action_fraction, failure_flag, dataset_size.
void write_epoch_records_csv(const std::filesystem::path& path, std::span<const EpochRecord> records);

}  // namespace edagger::dagger
