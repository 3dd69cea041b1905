#include "edagger/dagger/dagger.hpp"

#include <array>
#include <cmath>

#include "edagger/common/csv.hpp"
#include "edagger/common/errors.hpp"

namespace edagger::dagger {

using pendulum::PendulumState;

void Dataset::append(std::span<const double> observation, std::span<const double> action) {
  if (observation.size() != observations_.cols() || action.size() != actions_.cols())
    throw ShapeError("dataset: pair dimensions do not match");
  for (double v : observation)
    if (!std::isfinite(v)) throw ShapeError("dataset: non-finite observation");
  for (double v : action)
    if (!std::isfinite(v)) throw ShapeError("dataset: non-finite action");
  observations_.append_row(observation);
  actions_.append_row(action);
}

void Dataset::append(const Dataset& other) {
  for (std::size_t i = 0; i < other.size(); ++i) append(other.observations_.row(i), other.actions_.row(i));
}

std::vector<std::size_t> EnsembleSpec::widths(std::size_t obs_dim, std::size_t act_dim) const {
  std::vector<std::size_t> w{obs_dim};
  w.insert(w.end(), hidden.begin(), hidden.end());
  w.push_back(head == nn::OutputHead::MeanAndLogVariance ? 2 * act_dim : act_dim);
  return w;
}

void EnsembleSpec::validate() const {
  if (members == 0) throw ConfigError("ensemble needs at least one member");
  for (std::size_t h : hidden)
    if (h == 0) throw ConfigError("hidden widths must be positive");
}

PendulumState PendulumEnv::sample_initial(Rng& rng) const {
  PendulumState s;
  s.theta = rng.uniform(ic_theta.lo, ic_theta.hi);
  s.theta_dot = rng.uniform(ic_theta_dot.lo, ic_theta_dot.hi);
  return s;
}

void PendulumEnv::validate() const {
  expert.params.validate();
  if (!(ic_theta.lo <= ic_theta.hi) || !(ic_theta_dot.lo <= ic_theta_dot.hi))
    throw ConfigError("initial-condition box must satisfy lo <= hi");
}

EpochResult run_epoch(const uq::EnsemblePolicy* novice, const PendulumEnv& env, const DecisionRule& rule,
                      std::size_t epoch, const PendulumState& x0, Rng& decision_rng,
                      const FailureCheck& failure_check) {
  const pendulum::PendulumParams& params = env.expert.params;
  EpochResult out;
  out.delta = Dataset(2, 1);
  out.record.epoch = epoch;
  pendulum::Trajectory& traj = out.trajectory;
  traj.states.push_back(x0);

  PendulumState s = x0;
  std::size_t novice_steps = 0;
  for (std::size_t t = 0; t < params.max_steps; ++t) {
    if (env.stop_on_convergence && pendulum::converged(s, params)) {
      traj.terminated_early = true;
      break;
    }
    const std::array<double, 2> obs{s.theta, s.theta_dot};
    const std::array<double, 1> expert_u{env.expert(s)};
    Decision decision;
    if (novice == nullptr) {
      decision.chosen_action.assign(expert_u.begin(), expert_u.end());
      decision.actor = Actor::Expert;
    } else {
      decision = decide(rule, uq::ensemble_predict(*novice, obs), expert_u, epoch, decision_rng);
    }
    out.delta.append(obs, expert_u);
    const double u = pendulum::saturate(decision.chosen_action.front(), params);
    if (decision.actor == Actor::Novice) ++novice_steps;
    traj.actions.push_back(u);
    traj.actors.push_back(decision.actor);
    out.decisions.push_back(std::move(decision));
    try {
      s = pendulum::step(s, u, params);
    } catch (const SimulationBlowUp&) {
      // Keep the pre-blow-up state so the trajectory stays well formed.
      traj.actions.pop_back();
      traj.actors.pop_back();
      out.record.blew_up = true;
      break;
    }
    traj.states.push_back(s);
  }
  if (!out.record.blew_up && env.stop_on_convergence && pendulum::converged(s, params))
    traj.terminated_early = true;

  out.record.trajectory_len = traj.actions.size();
  out.record.novice_action_fraction =
      out.decisions.empty() ? 0.0 : static_cast<double>(novice_steps) / static_cast<double>(out.decisions.size());
  out.record.failure = out.record.blew_up || (failure_check && failure_check(traj));
  return out;
}

std::uint64_t DaggerSeeds::ic_seed(std::size_t epoch, std::size_t trajectory) const {
  if (epoch < per_epoch_ic.size()) return derive_seed(per_epoch_ic[epoch], {trajectory});
  return derive_seed(initial_conditions, {epoch, trajectory});
}

void DaggerConfig::validate() const {
  if (trajectories_per_epoch == 0) throw ConfigError("trajectories_per_epoch must be >= 1");
  dagger::validate(rule);
  ensemble.validate();
  train.validate();
  env.validate();
}

uq::EnsemblePolicy train_novice(const DaggerConfig& config, std::size_t epoch, const Dataset& dataset,
                                const uq::EnsemblePolicy* warm) {
  const std::uint64_t init_seed = derive_seed(config.seeds.run, {1, epoch});
  uq::EnsemblePolicy start =
      warm != nullptr ? *warm
                      : uq::EnsemblePolicy::initialized(config.ensemble.widths(2, 1), config.ensemble.activation,
                                                        config.ensemble.head, config.ensemble.members, init_seed);
  nn::TrainConfig train = config.train;
  train.rng_seed = derive_seed(config.seeds.run, {2, epoch});
  return uq::train_ensemble(std::move(start), dataset.observations(), dataset.actions(), train);
}

DaggerResult run_dagger(const DaggerConfig& config, const DaggerHooks& hooks) {
  config.validate();
  DaggerResult result;
  result.dataset = Dataset(2, 1);
  Rng decision_rng(derive_seed(config.seeds.run, {3}));

  std::optional<uq::EnsemblePolicy> novice;
  for (std::size_t epoch = 0; epoch <= config.epochs; ++epoch) {
    DecisionRule rule = config.rule;
    if (epoch > 0 && hooks.rule_for_epoch) {
      rule = hooks.rule_for_epoch(epoch, *novice, result.dataset);
      validate(rule);
    }
    const uq::EnsemblePolicy* acting = epoch == 0 ? nullptr : &*novice;

    std::vector<EpochResult> results;
    for (std::size_t j = 0; j < config.trajectories_per_epoch; ++j) {
      Rng ic_rng(config.seeds.ic_seed(epoch, j));
      const PendulumState x0 = config.env.sample_initial(ic_rng);
      results.push_back(run_epoch(acting, config.env, rule, epoch, x0, decision_rng, hooks.failure_check));
    }
    for (EpochResult& r : results) {
      result.dataset.append(r.delta);
      r.record.dataset_size = result.dataset.size();
      result.records.push_back(r.record);
    }

    std::optional<uq::EnsemblePolicy> trained;
    if (epoch < config.epochs || config.train_after_final_epoch) {
      const uq::EnsemblePolicy* warm = config.warm_start && novice ? &*novice : nullptr;
      trained = train_novice(config, epoch, result.dataset, warm);
    }
    if (hooks.on_epoch) {
      hooks.on_epoch(EpochSnapshot{epoch, rule, acting, trained ? &*trained : nullptr, results, result.dataset});
    }
    if (trained) novice = std::move(trained);
  }
  result.novice = std::move(novice);
  return result;
}

void write_epoch_records_csv(const std::filesystem::path& path, std::span<const EpochRecord> records) {
  CsvWriter csv(path, {"epoch", "trajectory_len", "novice_action_fraction", "failure_flag", "dataset_size"});
  for (const EpochRecord& r : records) {
    csv.cell(r.epoch).cell(r.trajectory_len).cell(r.novice_action_fraction).cell(r.failure ? 1 : 0).cell(
        r.dataset_size);
    csv.end_row();
  }
}

}  // namespace edagger::dagger
