#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "edagger/dagger/dagger.hpp"
#include "edagger/dagger/decision.hpp"
#include "edagger/pendulum/basin.hpp"
#include "edagger/pendulum/grid.hpp"
#include "edagger/pendulum/simulate.hpp"
#include "edagger/uq/ensemble.hpp"

namespace edagger::analysis {

using pendulum::GridMask;
using pendulum::StateGrid;

/// Per-cell decision statistics of a novice against the expert.
struct GridStatistics {
  StateGrid grid;
  std::vector<double> novice_mean;     // first action dimension
  std::vector<double> discrepancy_sq;  // |a_nov - a_exp|^2
  std::vector<double> doubt;
};

/// Rows per batched ensemble evaluation.
inline constexpr std::size_t kEvalChunk = 512;

GridStatistics grid_statistics(const uq::EnsemblePolicy& novice, const pendulum::ExpertController& expert,
                               const StateGrid& grid);

/// Cells where the rule lets the novice act. Vanilla throws dagger::UnsupportedRule.
GridMask permitted_set(const dagger::DecisionRule& rule, const GridStatistics& stats);
GridMask permitted_set(const dagger::DecisionRule& rule, const uq::EnsemblePolicy& novice,
                       const pendulum::ExpertController& expert, const StateGrid& grid);

double permitted_volume(const GridMask& set);

enum class ThresholdKind { Discrepancy, Doubt };

std::span<const double> statistic(const GridStatistics& stats, ThresholdKind kind);
dagger::DecisionRule make_rule(ThresholdKind kind, double threshold);

struct ThresholdResult {
  double threshold = 0.0;
  double volume = 0.0;
  std::size_t iterations = 0;
};

/// The bracket could not reach the target volume.
class InfeasibleTarget : public std::runtime_error {
 public:
  InfeasibleTarget(double best_threshold, double best_volume);
  double best_threshold() const noexcept { return best_threshold_; }
  double best_volume() const noexcept { return best_volume_; }

 private:
  double best_threshold_;
  double best_volume_;
};

struct BisectionOptions {
  /// Stop once |volume - target| <= tolerance. 0 runs until the bracket is
  /// two adjacent doubles, which yields the smallest threshold reaching the
  /// target.
  double tolerance = 0.0;
  std::size_t max_iter = 2000;
  std::size_t max_doublings = 200;
};

/// Bisection on the threshold for a target permitted-set volume. Keeps
/// volume(lo) < target <= volume(hi); the bracket starts at [0, 1] and doubles
/// hi until the target is reached.
ThresholdResult solve_threshold_for_volume(std::span<const double> statistic, double target_volume,
                                           const BisectionOptions& options = {});
ThresholdResult solve_threshold_for_volume(ThresholdKind kind, const GridStatistics& stats, double target_volume,
                                           const BisectionOptions& options = {});

/// Network arithmetic used when rolling the novice forward. Single evaluates
/// the members through nn::FloatNet; the dynamics stay in double either way.
enum class Precision { Double, Single };

/// Basin of the saturated novice mean action. Cells outside `candidates`
/// (if given) are skipped and reported false.
GridMask novice_basin(const uq::EnsemblePolicy& novice, const StateGrid& grid, const pendulum::PendulumParams& params,
                      const GridMask* candidates = nullptr, Precision precision = Precision::Double);

/// Fraction of cells in both basins.
double learning_performance(const GridMask& novice_basin, const GridMask& expert_basin);

/// True iff some visited state maps outside the window or onto a cell
/// outside the expert basin.
bool failure_of_trajectory(const pendulum::Trajectory& traj, const GridMask& expert_basin);

double failure_rate(std::span<const bool> failures);

/// Expert basin stored under cache_dir, keyed by a hash of the controller
/// parameters and the grid. Computed and written on a miss.
GridMask cached_expert_basin(const pendulum::ExpertController& expert, const StateGrid& grid,
                             const std::filesystem::path& cache_dir);
std::uint64_t expert_basin_key(const pendulum::ExpertController& expert, const StateGrid& grid);

/// Mean over set cells of the Euclidean (theta, theta_dot) distance to the
/// nearest dataset observation. nullopt for an empty mask or dataset.
std::optional<double> mean_nearest_dataset_distance(const GridMask& mask, const dagger::Dataset& dataset);

struct MetricsRecord {
  std::size_t epoch = 0;
  double permitted_volume = 0.0;
  double learning_performance = 0.0;
  bool failure = false;
  std::optional<double> novice_basin_volume;  // absent when only candidate cells were simulated
};

/// Columns: theta, theta_dot, flag.
void write_mask_csv(const std::filesystem::path& path, const GridMask& mask);
GridMask read_mask_csv(const std::filesystem::path& path, const StateGrid& grid);

}  // namespace edagger::analysis
