#include <cstdio>
#include <iostream>
#include <mutex>

#include "edagger/common/csv.hpp"
#include "edagger/common/parallel.hpp"
#include "edagger/exp/experiments.hpp"
#include "edagger/exp/svg.hpp"

namespace edagger::exp {

namespace fs = std::filesystem;

namespace {

std::string rep_tag(std::size_t rep) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "rep%03zu", rep);
  return buf;
}

}  // namespace

std::vector<double> FixedResult::learning_performance(std::size_t rule, std::size_t epoch) const {
  std::vector<double> out;
  for (std::size_t r = 0; r < repetitions; ++r) out.push_back(run(rule, r).metrics.at(epoch - 1).learning_performance);
  return out;
}

std::vector<double> FixedResult::permitted_volume(std::size_t rule, std::size_t epoch) const {
  std::vector<double> out;
  for (std::size_t r = 0; r < repetitions; ++r) out.push_back(run(rule, r).metrics.at(epoch - 1).permitted_volume);
  return out;
}

std::vector<bool> FixedResult::failures(std::size_t rule, std::size_t epoch) const {
  std::vector<bool> out;
  for (std::size_t r = 0; r < repetitions; ++r) out.push_back(run(rule, r).metrics.at(epoch - 1).failure);
  return out;
}

FixedResult run_pendulum_fixed(const ExperimentConfig& config, const fs::path& out_dir) {
  const PendulumSetup& ps = config.pendulum;
  const pendulum::ExpertController& expert = ps.env.expert;
  fs::create_directories(out_dir / "runs");
  const fs::path cache = ps.basin_cache_dir.empty() ? out_dir / "cache" : ps.basin_cache_dir;
  const pendulum::GridMask expert_basin = analysis::cached_expert_basin(expert, ps.grid, cache);
  analysis::write_mask_csv(out_dir / "expert_basin.csv", expert_basin);

  FixedResult res;
  for (const NamedRule& r : config.rules) res.rule_names.push_back(r.name);
  res.epochs = ps.dagger_epochs;
  res.repetitions = config.repetitions;
  res.runs.resize(config.rules.size() * config.repetitions);

  std::mutex log_mutex;
  parallel_for(res.runs.size(), config.jobs, [&](std::size_t idx) {
    const std::size_t rule_id = idx / config.repetitions;
    const std::size_t rep = idx % config.repetitions;
    FixedRun& run = res.runs[idx];
    run.rule = rule_id;
    run.repetition = rep;

    dagger::DaggerConfig dc;
    dc.epochs = ps.dagger_epochs;
    dc.trajectories_per_epoch = ps.trajectories_per_epoch;
    dc.rule = config.rules[rule_id].rule;
    dc.ensemble = ps.ensemble;
    dc.train = ps.train;
    dc.env = ps.env;
    dc.seeds = run_seeds(config, rule_id, rep);
    dc.warm_start = ps.warm_start;
    dc.train_after_final_epoch = true;

    dagger::DaggerHooks hooks;
    hooks.failure_check = [&](const pendulum::Trajectory& t) { return analysis::failure_of_trajectory(t, expert_basin); };
    hooks.on_epoch = [&](const dagger::EpochSnapshot& snap) {
      if (snap.epoch == 0) return;
      analysis::MetricsRecord m;
      m.epoch = snap.epoch;
      const analysis::GridStatistics stats = analysis::grid_statistics(*snap.acting_novice, expert, ps.grid);
      m.permitted_volume = analysis::permitted_set(snap.rule, stats).volume();
      for (const dagger::EpochResult& er : snap.results) m.failure = m.failure || er.record.failure;
      const pendulum::GridMask basin = analysis::novice_basin(*snap.trained_novice, ps.grid, expert.params,
                                                              ps.full_novice_basin ? nullptr : &expert_basin, ps.basin_precision);
      m.learning_performance = analysis::learning_performance(basin, expert_basin);
      if (ps.full_novice_basin) m.novice_basin_volume = basin.volume();
      run.metrics.push_back(m);
    };
    run.records = dagger::run_dagger(dc, hooks).records;
    dagger::write_epoch_records_csv(out_dir / "runs" / (config.rules[rule_id].name + "_" + rep_tag(rep) + ".csv"),
                                    run.records);
    std::lock_guard lock(log_mutex);
    std::clog << "[pendulum-fixed] " << config.rules[rule_id].name << " " << rep_tag(rep) << " done\n";
  });

  {
    CsvWriter csv(out_dir / "metrics_per_repetition.csv",
                  {"rule", "repetition", "epoch", "permitted_volume", "learning_performance", "failure_flag",
                   "novice_basin_volume"});
    for (const FixedRun& run : res.runs) {
      for (const analysis::MetricsRecord& m : run.metrics) {
        csv.cell(res.rule_names[run.rule]).cell(run.repetition).cell(m.epoch).cell(m.permitted_volume);
        csv.cell(m.learning_performance).cell(m.failure ? 1 : 0);
        if (m.novice_basin_volume) {
          csv.cell(*m.novice_basin_volume);
        } else {
          csv.empty();
        }
        csv.end_row();
      }
    }
  }

  struct MetricOut {
    const char* file;
    const char* title;
    std::function<Summary(std::size_t rule, std::size_t epoch)> summary;
  };
  const std::vector<MetricOut> metrics = {
      {"learning_performance", "Learning performance",
       [&](std::size_t r, std::size_t e) { return summarize(res.learning_performance(r, e)); }},
      {"failure_rate", "Failure rate", [&](std::size_t r, std::size_t e) { return summarize_rate(res.failures(r, e)); }},
      {"permitted_volume", "Permitted set volume",
       [&](std::size_t r, std::size_t e) { return summarize(res.permitted_volume(r, e)); }},
  };
  for (const MetricOut& metric : metrics) {
    CsvWriter csv(out_dir / (std::string(metric.file) + ".csv"), {"rule", "epoch", "mean", "stderr"});
    std::vector<Series> series;
    for (std::size_t r = 0; r < res.rule_names.size(); ++r) {
      Series s{res.rule_names[r], {}, {}, {}};
      for (std::size_t e = 1; e <= res.epochs; ++e) {
        const Summary sm = metric.summary(r, e);
        csv.cell(res.rule_names[r]).cell(e).cell(sm.mean).cell(sm.std_error);
        csv.end_row();
        s.x.push_back(static_cast<double>(e));
        s.y.push_back(sm.mean);
        s.err.push_back(sm.std_error);
      }
      series.push_back(std::move(s));
    }
    write_line_chart(out_dir / (std::string(metric.file) + ".svg"), metric.title, "epoch", metric.title, series);
  }
  return res;
}

}  // namespace edagger::exp
