#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "edagger/pendulum/dynamics.hpp"
#include "edagger/pendulum/grid.hpp"

namespace edagger::pendulum {

/// Evaluates a policy on many states at once: actions[i] = policy(states[i]).
/// Actions are saturated by the caller.
using BatchPolicy = std::function<void(std::span<const PendulumState> states, std::span<double> actions)>;

/// Wraps a per-state policy.
BatchPolicy batch_policy(std::function<double(const PendulumState&)> policy);

/// Cell is true iff the closed loop started at the cell's state satisfies
/// converged() within params.basin_max_steps transitions. When `candidates`
/// is given, cells outside it are reported false without simulation.
/// States whose integration blows up count as not converged.
GridMask basin_of_attraction(const BatchPolicy& policy, const StateGrid& grid, const PendulumParams& params,
                             const GridMask* candidates = nullptr);

GridMask expert_basin(const ExpertController& expert, const StateGrid& grid);

}  // namespace edagger::pendulum
