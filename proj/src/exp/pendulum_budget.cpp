#include <iostream>
#include <mutex>

#include "edagger/common/csv.hpp"
#include "edagger/common/parallel.hpp"
#include "edagger/exp/experiments.hpp"
#include "edagger/exp/svg.hpp"

namespace edagger::exp {

namespace fs = std::filesystem;

namespace {

std::string kind_label(analysis::ThresholdKind k) { return k == analysis::ThresholdKind::Doubt ? "doubt" : "discrepancy"; }

struct PanelData {
  std::size_t epoch;
  pendulum::GridMask permitted;
  dagger::Dataset dataset;  // what the acting novice was trained on
  pendulum::Trajectory trajectory;
};

void write_dataset_csv(const fs::path& path, const dagger::Dataset& d) {
  CsvWriter csv(path, {"theta", "theta_dot", "expert_action"});
  for (std::size_t i = 0; i < d.size(); ++i) {
    csv.cell(d.observations()(i, 0)).cell(d.observations()(i, 1)).cell(d.actions()(i, 0));
    csv.end_row();
  }
}

void write_panels(const fs::path& path, const std::vector<std::string>& row_names,
                  const std::vector<std::vector<PanelData>>& rows, const pendulum::StateGrid& grid) {
  std::size_t cols = 0;
  for (const auto& r : rows) cols = std::max(cols, r.size());
  const double pw = 280, ph = 220;
  Svg svg(90 + pw * static_cast<double>(cols) + 40.0 * static_cast<double>(cols),
          60 + (ph + 70) * static_cast<double>(rows.size()));
  const double cw = pw / static_cast<double>(grid.n_theta);
  const double ch = ph / static_cast<double>(grid.n_theta_dot);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const PanelData& p = rows[r][c];
      const Axes axes{70 + (pw + 40) * static_cast<double>(c), 40 + (ph + 70) * static_cast<double>(r), pw, ph,
                      grid.theta.lo, grid.theta.hi, grid.theta_dot.lo, grid.theta_dot.hi};
      svg.frame(axes, row_names[r] + ", epoch " + std::to_string(p.epoch), "theta", "theta_dot");
      for (std::size_t i = 0; i < p.permitted.cells.size(); ++i) {
        if (!p.permitted.at(i)) continue;
        const pendulum::PendulumState s = grid.state(i);
        svg.rect(axes.px(s.theta) - cw / 2, axes.py(s.theta_dot) - ch / 2, cw, ch, "#999999", 0.8);
      }
      for (std::size_t i = 0; i < p.dataset.size(); ++i) {
        const double th = pendulum::wrap_angle(p.dataset.observations()(i, 0));
        svg.circle(axes.px(th), axes.py(p.dataset.observations()(i, 1)), 1.6, "#1f77b4");
      }
      for (std::size_t t = 0; t + 1 < p.trajectory.states.size(); ++t) {
        const auto& a = p.trajectory.states[t];
        const auto& b = p.trajectory.states[t + 1];
        svg.line(axes.px(a.theta), axes.py(a.theta_dot), axes.px(b.theta), axes.py(b.theta_dot),
                 p.trajectory.actors[t] == pendulum::Actor::Novice ? "#d62728" : "black", 1.5);
      }
    }
  }
  svg.save(path);
}

}  // namespace

std::optional<double> BudgetResult::pooled_distance(std::size_t rule, std::size_t rep) const {
  double total = 0.0;
  std::size_t cells = 0;
  for (const BudgetEpoch& e : epochs) {
    if (e.rule != rule || e.repetition != rep || !e.mean_nearest_distance) continue;
    total += *e.mean_nearest_distance * static_cast<double>(e.permitted_cells);
    cells += e.permitted_cells;
  }
  if (cells == 0) return std::nullopt;
  return total / static_cast<double>(cells);
}

BudgetResult run_pendulum_budget(const ExperimentConfig& config, const fs::path& out_dir) {
  const PendulumSetup& ps = config.pendulum;
  const pendulum::ExpertController& expert = ps.env.expert;
  const BudgetSettings& bs = config.budget;
  fs::create_directories(out_dir / "runs");
  const fs::path cache = ps.basin_cache_dir.empty() ? out_dir / "cache" : ps.basin_cache_dir;
  const pendulum::GridMask expert_basin = analysis::cached_expert_basin(expert, ps.grid, cache);
  analysis::write_mask_csv(out_dir / "expert_basin.csv", expert_basin);

  BudgetResult res;
  res.rules = bs.rules;
  res.repetitions = config.repetitions;
  const std::size_t slots = bs.rules.size() * config.repetitions;
  std::vector<std::vector<BudgetEpoch>> per_run(slots);
  std::vector<std::vector<PanelData>> panels(bs.rules.size());

  std::mutex log_mutex;
  parallel_for(slots, config.jobs, [&](std::size_t idx) {
    const std::size_t rule_id = idx / config.repetitions;
    const std::size_t rep = idx % config.repetitions;
    const analysis::ThresholdKind kind = bs.rules[rule_id];
    const bool detail = rep < bs.novice_basin_repetitions;
    const fs::path run_dir = out_dir / "runs" / kind_label(kind) / ("rep" + std::to_string(rep));
    fs::create_directories(run_dir);

    dagger::DaggerConfig dc;
    dc.epochs = ps.dagger_epochs;
    dc.trajectories_per_epoch = ps.trajectories_per_epoch;
    dc.rule = analysis::make_rule(kind, 0.0);
    dc.ensemble = ps.ensemble;
    dc.train = ps.train;
    dc.env = ps.env;
    dc.seeds = run_seeds(config, rule_id, rep);
    dc.warm_start = ps.warm_start;
    dc.train_after_final_epoch = detail;

    BudgetEpoch pending;
    std::optional<pendulum::GridMask> pending_mask;
    dagger::Dataset pending_dataset;
    dagger::DaggerHooks hooks;
    hooks.failure_check = [&](const pendulum::Trajectory& t) { return analysis::failure_of_trajectory(t, expert_basin); };
    hooks.rule_for_epoch = [&](std::size_t epoch, const uq::EnsemblePolicy& novice, const dagger::Dataset& data) {
      pending = BudgetEpoch{};
      pending.rule = rule_id;
      pending.repetition = rep;
      pending.epoch = epoch;
      pending.target_volume = bs.budget(epoch);
      const analysis::GridStatistics stats = analysis::grid_statistics(novice, expert, ps.grid);
      try {
        pending.threshold = analysis::solve_threshold_for_volume(kind, stats, pending.target_volume, bs.bisection).threshold;
      } catch (const analysis::InfeasibleTarget& e) {
        pending.threshold = e.best_threshold();
        pending.infeasible = true;
      }
      const dagger::DecisionRule rule = analysis::make_rule(kind, pending.threshold);
      pending_mask = analysis::permitted_set(rule, stats);
      pending.permitted_volume = pending_mask->volume();
      pending.permitted_cells = pending_mask->count();
      pending.mean_nearest_distance = analysis::mean_nearest_dataset_distance(*pending_mask, data);
      if (detail) pending_dataset = data;
      return rule;
    };
    hooks.on_epoch = [&](const dagger::EpochSnapshot& snap) {
      if (detail) {
        pendulum::write_trajectory_csv(run_dir / ("epoch" + std::to_string(snap.epoch) + "_trajectory.csv"),
                                       snap.results.front().trajectory);
      }
      if (snap.epoch == 0) return;
      pending.record = snap.results.front().record;
      for (const dagger::EpochResult& er : snap.results) pending.record.failure = pending.record.failure || er.record.failure;
      if (detail) {
        const std::string stem = "epoch" + std::to_string(snap.epoch);
        analysis::write_mask_csv(run_dir / (stem + "_permitted.csv"), *pending_mask);
        write_dataset_csv(run_dir / (stem + "_dataset.csv"), pending_dataset);
        if (snap.trained_novice != nullptr) {
          const pendulum::GridMask basin = analysis::novice_basin(*snap.trained_novice, ps.grid, expert.params,
                                                                  ps.full_novice_basin ? nullptr : &expert_basin, ps.basin_precision);
          pending.learning_performance = analysis::learning_performance(basin, expert_basin);
          analysis::write_mask_csv(run_dir / (stem + "_novice_basin.csv"), basin);
        }
        if (rep == 0) {
          panels[rule_id].push_back(
              PanelData{snap.epoch, *pending_mask, pending_dataset, snap.results.front().trajectory});
        }
      }
      per_run[idx].push_back(pending);
    };
    const dagger::DaggerResult result = dagger::run_dagger(dc, hooks);
    dagger::write_epoch_records_csv(run_dir / "epoch_records.csv", result.records);
    std::lock_guard lock(log_mutex);
    std::clog << "[pendulum-budget] " << kind_label(kind) << " rep" << rep << " done\n";
  });
  for (auto& run : per_run) res.epochs.insert(res.epochs.end(), run.begin(), run.end());

  {
    CsvWriter csv(out_dir / "summary.csv",
                  {"rule", "repetition", "epoch", "target_volume", "threshold", "permitted_volume", "infeasible",
                   "permitted_cells", "mean_nearest_distance", "trajectory_len", "novice_action_fraction",
                   "failure_flag", "dataset_size", "learning_performance"});
    for (const BudgetEpoch& e : res.epochs) {
      csv.cell(kind_label(res.rules[e.rule])).cell(e.repetition).cell(e.epoch).cell(e.target_volume);
      csv.cell(e.threshold).cell(e.permitted_volume).cell(e.infeasible ? 1 : 0).cell(e.permitted_cells);
      if (e.mean_nearest_distance) {
        csv.cell(*e.mean_nearest_distance);
      } else {
        csv.empty();
      }
      csv.cell(e.record.trajectory_len).cell(e.record.novice_action_fraction).cell(e.record.failure ? 1 : 0);
      csv.cell(e.record.dataset_size);
      if (e.learning_performance) {
        csv.cell(*e.learning_performance);
      } else {
        csv.empty();
      }
      csv.end_row();
    }
  }

  std::vector<std::string> names;
  for (auto k : res.rules) names.push_back(kind_label(k));
  std::size_t doubt_id = names.size(), disc_id = names.size();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (res.rules[i] == analysis::ThresholdKind::Doubt && doubt_id == names.size()) doubt_id = i;
    if (res.rules[i] == analysis::ThresholdKind::Discrepancy && disc_id == names.size()) disc_id = i;
  }
  if (doubt_id < names.size() && disc_id < names.size()) {
    CsvWriter csv(out_dir / "familiarity.csv", {"repetition", "doubt_distance", "discrepancy_distance", "doubt_closer"});
    for (std::size_t rep = 0; rep < res.repetitions; ++rep) {
      const auto a = res.pooled_distance(doubt_id, rep);
      const auto b = res.pooled_distance(disc_id, rep);
      csv.cell(rep);
      a ? csv.cell(*a) : csv.empty();
      b ? csv.cell(*b) : csv.empty();
      csv.cell(a && b && *a < *b ? 1 : 0);
      csv.end_row();
    }
  }
  if (bs.novice_basin_repetitions > 0) write_panels(out_dir / "permitted_sets.svg", names, panels, ps.grid);
  return res;
}

}  // namespace edagger::exp
