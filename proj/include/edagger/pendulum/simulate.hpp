#pragma once

#include <concepts>
#include <cstddef>
#include <filesystem>
#include <type_traits>
#include <vector>

#include "edagger/pendulum/dynamics.hpp"

namespace edagger::pendulum {

struct Trajectory {
  std::vector<PendulumState> states;
  std::vector<double> actions;  // saturated, one per transition
  std::vector<Actor> actors;
  bool terminated_early = false;

  std::size_t transitions() const { return actions.size(); }
};

/// A policy step that also reports who acted.
struct Control {
  double u;
  Actor actor;
};

template <class P>
concept ScalarPolicy = std::is_invocable_r_v<double, P, const PendulumState&> &&
                       !std::is_same_v<std::invoke_result_t<P, const PendulumState&>, Control>;

template <class P>
concept ActorPolicy = std::is_same_v<std::invoke_result_t<P, const PendulumState&>, Control>;

/// Rolls forward at most `max_steps` transitions, saturating every action, and
/// stops as soon as `stop(state)` holds. A policy returning a bare double is
/// recorded as the expert. Throws SimulationBlowUp.
template <class Policy, class Stop>
  requires(ScalarPolicy<Policy> || ActorPolicy<Policy>) && std::predicate<Stop, const PendulumState&>
Trajectory simulate(Policy&& policy, const PendulumState& x0, const PendulumParams& params, Stop&& stop,
                    std::size_t max_steps) {
  Trajectory traj;
  traj.states.push_back(x0);
  PendulumState s = x0;
  for (std::size_t t = 0; t < max_steps; ++t) {
    if (stop(s)) {
      traj.terminated_early = true;
      return traj;
    }
    Control control;
    if constexpr (ActorPolicy<Policy>) {
      control = policy(s);
    } else {
      control = {static_cast<double>(policy(s)), Actor::Expert};
    }
    const double u = saturate(control.u, params);
    s = step(s, u, params);
    traj.states.push_back(s);
    traj.actions.push_back(u);
    traj.actors.push_back(control.actor);
  }
  if (stop(s)) traj.terminated_early = true;
  return traj;
}

/// simulate() with params.max_steps.
template <class Policy, class Stop>
Trajectory simulate(Policy&& policy, const PendulumState& x0, const PendulumParams& params, Stop&& stop) {
  return simulate(std::forward<Policy>(policy), x0, params, std::forward<Stop>(stop), params.max_steps);
}

/// Columns: step, theta, theta_dot, action, actor. The final state has no action.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

}  // namespace edagger::pendulum
