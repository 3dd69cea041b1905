#include "edagger/analysis/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <type_traits>

#include "edagger/common/csv.hpp"
#include "edagger/common/errors.hpp"
#include "edagger/common/hash.hpp"

namespace edagger::analysis {

namespace {

void require_same_grid(const GridMask& a, const GridMask& b, const char* what) {
  if (!(a.grid == b.grid) || a.cells.size() != b.cells.size()) throw ShapeError(std::string(what) + ": masks are on different grids");
}

std::size_t count_at_most(std::span<const double> values, double threshold) {
  std::size_t n = 0;
  for (double v : values) n += v <= threshold ? 1 : 0;
  return n;
}

// Evaluates the novice mean on a batch of states, kEvalChunk rows at a time.
template <class Evaluator>
class NoviceMeanPolicy {
 public:
  explicit NoviceMeanPolicy(const uq::EnsemblePolicy& novice) : evaluator_(novice) {}

  void operator()(std::span<const pendulum::PendulumState> states, std::span<double> actions) {
    for (std::size_t begin = 0; begin < states.size(); begin += kEvalChunk) {
      const std::size_t rows = std::min(kEvalChunk, states.size() - begin);
      obs_.resize(rows, 2);
      for (std::size_t r = 0; r < rows; ++r) {
        obs_(r, 0) = states[begin + r].theta;
        obs_(r, 1) = states[begin + r].theta_dot;
      }
      if constexpr (std::is_same_v<Evaluator, uq::EnsembleMeanF32>) {
        evaluator_.predict_mean(obs_, mean_);
      } else {
        evaluator_.predict(obs_, mean_, variance_);
      }
      for (std::size_t r = 0; r < rows; ++r) actions[begin + r] = mean_(r, 0);
    }
  }

 private:
  Evaluator evaluator_;
  nn::Matrix obs_, mean_, variance_;
};

template <class Evaluator>
pendulum::BatchPolicy mean_policy(const uq::EnsemblePolicy& novice) {
  auto policy = std::make_shared<NoviceMeanPolicy<Evaluator>>(novice);
  return [policy](std::span<const pendulum::PendulumState> s, std::span<double> a) { (*policy)(s, a); };
}

}  // namespace

GridStatistics grid_statistics(const uq::EnsemblePolicy& novice, const pendulum::ExpertController& expert,
                               const StateGrid& grid) {
  grid.validate();
  if (novice.input_size() != 2 || novice.action_dim() != 1)
    throw ShapeError("grid_statistics: novice must map 2-D states to 1-D actions");
  GridStatistics stats;
  stats.grid = grid;
  const std::size_t n = grid.size();
  stats.novice_mean.resize(n);
  stats.discrepancy_sq.resize(n);
  stats.doubt.resize(n);

  uq::EnsembleEvaluator evaluator(novice);
  nn::Matrix obs, mean, variance;
  for (std::size_t begin = 0; begin < n; begin += kEvalChunk) {
    const std::size_t rows = std::min(kEvalChunk, n - begin);
    obs.resize(rows, 2);
    for (std::size_t r = 0; r < rows; ++r) {
      const pendulum::PendulumState s = grid.state(begin + r);
      obs(r, 0) = s.theta;
      obs(r, 1) = s.theta_dot;
    }
    evaluator.predict(obs, mean, variance);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t idx = begin + r;
      const double e = mean(r, 0) - expert(grid.state(idx));
      stats.novice_mean[idx] = mean(r, 0);
      stats.discrepancy_sq[idx] = e * e;
      stats.doubt[idx] = uq::doubt_of(variance.row(r));
    }
  }
  return stats;
}

GridMask permitted_set(const dagger::DecisionRule& rule, const GridStatistics& stats) {
  if (std::holds_alternative<dagger::VanillaRule>(rule))
    throw dagger::UnsupportedRule("permitted_set: vanilla rule membership is stochastic");
  GridMask mask(stats.grid);
  for (std::size_t i = 0; i < mask.cells.size(); ++i)
    mask.set(i, dagger::permits(rule, stats.discrepancy_sq[i], stats.doubt[i]));
  return mask;
}

GridMask permitted_set(const dagger::DecisionRule& rule, const uq::EnsemblePolicy& novice,
                       const pendulum::ExpertController& expert, const StateGrid& grid) {
  if (std::holds_alternative<dagger::VanillaRule>(rule))
    throw dagger::UnsupportedRule("permitted_set: vanilla rule membership is stochastic");
  return permitted_set(rule, grid_statistics(novice, expert, grid));
}

double permitted_volume(const GridMask& set) { return set.volume(); }

std::span<const double> statistic(const GridStatistics& stats, ThresholdKind kind) {
  return kind == ThresholdKind::Discrepancy ? std::span<const double>(stats.discrepancy_sq)
                                            : std::span<const double>(stats.doubt);
}

dagger::DecisionRule make_rule(ThresholdKind kind, double threshold) {
  if (kind == ThresholdKind::Discrepancy) return dagger::DiscrepancyRule{threshold};
  return dagger::DoubtRule{threshold};
}

InfeasibleTarget::InfeasibleTarget(double best_threshold, double best_volume)
    : std::runtime_error("target volume unreachable; best volume " + format_double(best_volume) +
                         " at threshold " + format_double(best_threshold)),
      best_threshold_(best_threshold),
      best_volume_(best_volume) {}

ThresholdResult solve_threshold_for_volume(std::span<const double> values, double target_volume,
                                           const BisectionOptions& options) {
  if (!(target_volume >= 0.0 && target_volume <= 1.0)) throw ConfigError("target volume must lie in [0, 1]");
  if (values.empty()) throw ShapeError("solve_threshold_for_volume: empty statistic");
  const double n = static_cast<double>(values.size());
  // Smallest count whose volume reaches the target; the slack absorbs k/N
  // round-off in the target.
  const auto needed = static_cast<std::size_t>(std::max(0.0, std::ceil(target_volume * n - 1e-6)));
  const auto volume = [&](double t) { return static_cast<double>(count_at_most(values, t)) / n; };

  ThresholdResult result;
  double lo = 0.0;
  if (needed == 0 || count_at_most(values, lo) >= needed) {
    result.threshold = lo;
    result.volume = volume(lo);
    return result;
  }

  double hi = 1.0;
  std::size_t doublings = 0;
  while (count_at_most(values, hi) < needed) {
    if (++doublings > options.max_doublings || !std::isfinite(hi * 2.0)) throw InfeasibleTarget(hi, volume(hi));
    lo = hi;
    hi *= 2.0;
  }

  while (result.iterations < options.max_iter) {
    if (options.tolerance > 0.0 && std::abs(volume(hi) - target_volume) <= options.tolerance) break;
    const double mid = lo + (hi - lo) / 2.0;
    if (!(mid > lo && mid < hi)) break;
    ++result.iterations;
    if (count_at_most(values, mid) >= needed) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  result.threshold = hi;
  result.volume = volume(hi);
  return result;
}

ThresholdResult solve_threshold_for_volume(ThresholdKind kind, const GridStatistics& stats, double target_volume,
                                           const BisectionOptions& options) {
  return solve_threshold_for_volume(statistic(stats, kind), target_volume, options);
}

GridMask novice_basin(const uq::EnsemblePolicy& novice, const StateGrid& grid, const pendulum::PendulumParams& params,
                      const GridMask* candidates, Precision precision) {
  if (novice.input_size() != 2 || novice.action_dim() != 1)
    throw ShapeError("novice_basin: novice must map 2-D states to 1-D actions");
  const pendulum::BatchPolicy policy = precision == Precision::Single ? mean_policy<uq::EnsembleMeanF32>(novice)
                                                                      : mean_policy<uq::EnsembleEvaluator>(novice);
  return pendulum::basin_of_attraction(policy, grid, params, candidates);
}

double learning_performance(const GridMask& novice, const GridMask& expert) {
  require_same_grid(novice, expert, "learning_performance");
  std::size_t both = 0;
  for (std::size_t i = 0; i < novice.cells.size(); ++i) both += (novice.at(i) && expert.at(i)) ? 1 : 0;
  return static_cast<double>(both) / static_cast<double>(novice.cells.size());
}

bool failure_of_trajectory(const pendulum::Trajectory& traj, const GridMask& expert_basin) {
  for (const pendulum::PendulumState& s : traj.states) {
    const auto cell = expert_basin.grid.nearest(s);
    if (!cell || !expert_basin.at(*cell)) return true;
  }
  return false;
}

double failure_rate(std::span<const bool> failures) {
  if (failures.empty()) return 0.0;
  const auto n = std::count(failures.begin(), failures.end(), true);
  return static_cast<double>(n) / static_cast<double>(failures.size());
}

std::uint64_t expert_basin_key(const pendulum::ExpertController& expert, const StateGrid& grid) {
  const pendulum::PendulumParams& p = expert.params;
  std::string text = "expert_basin/v1";
  for (double v : {expert.gains[0], expert.gains[1], p.a, p.b, p.c, p.u_min, p.u_max, p.dt, p.convergence_radius,
                   grid.theta.lo, grid.theta.hi, grid.theta_dot.lo, grid.theta_dot.hi}) {
    text += ';' + format_double(v);
  }
  text += ';' + std::to_string(p.basin_max_steps) + ';' + std::to_string(grid.n_theta) + ';' +
          std::to_string(grid.n_theta_dot);
  return fnv1a64(text);
}

GridMask cached_expert_basin(const pendulum::ExpertController& expert, const StateGrid& grid,
                             const std::filesystem::path& cache_dir) {
  const auto path = cache_dir / ("expert_basin_" + hex64(expert_basin_key(expert, grid)) + ".csv");
  if (std::filesystem::exists(path)) {
    try {
      return read_mask_csv(path, grid);
    } catch (const std::exception&) {
      // Fall through and rebuild a damaged cache entry.
    }
  }
  GridMask basin = pendulum::expert_basin(expert, grid);
  std::filesystem::create_directories(cache_dir);
  const auto tmp = path.string() + ".tmp";
  write_mask_csv(tmp, basin);
  std::filesystem::rename(tmp, path);
  return basin;
}

std::optional<double> mean_nearest_dataset_distance(const GridMask& mask, const dagger::Dataset& dataset) {
  if (dataset.empty() || mask.count() == 0) return std::nullopt;
  const nn::Matrix& obs = dataset.observations();
  double total = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < mask.cells.size(); ++i) {
    if (!mask.at(i)) continue;
    const pendulum::PendulumState s = mask.grid.state(i);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < obs.rows(); ++r) {
      const double dt = s.theta - obs(r, 0);
      const double dv = s.theta_dot - obs(r, 1);
      best = std::min(best, dt * dt + dv * dv);
    }
    total += std::sqrt(best);
    ++cells;
  }
  return total / static_cast<double>(cells);
}

void write_mask_csv(const std::filesystem::path& path, const GridMask& mask) {
  CsvWriter csv(path, {"theta", "theta_dot", "flag"});
  for (std::size_t i = 0; i < mask.cells.size(); ++i) {
    const pendulum::PendulumState s = mask.grid.state(i);
    csv.cell(s.theta).cell(s.theta_dot).cell(mask.at(i) ? 1 : 0);
    csv.end_row();
  }
}

GridMask read_mask_csv(const std::filesystem::path& path, const StateGrid& grid) {
  const CsvTable table = read_csv(path);
  const std::size_t flag = table.column("flag");
  if (table.rows.size() != grid.size()) throw ShapeError("mask file " + path.string() + " does not match the grid");
  GridMask mask(grid);
  for (std::size_t i = 0; i < table.rows.size(); ++i) mask.set(i, table.rows[i].at(flag) == "1");
  return mask;
}

}  // namespace edagger::analysis
