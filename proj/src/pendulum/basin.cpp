#include "edagger/pendulum/basin.hpp"

#include <cmath>
#include <vector>

#include "edagger/common/errors.hpp"

namespace edagger::pendulum {

BatchPolicy batch_policy(std::function<double(const PendulumState&)> policy) {
  return [policy = std::move(policy)](std::span<const PendulumState> states, std::span<double> actions) {
    for (std::size_t i = 0; i < states.size(); ++i) actions[i] = policy(states[i]);
  };
}

GridMask basin_of_attraction(const BatchPolicy& policy, const StateGrid& grid, const PendulumParams& params,
                             const GridMask* candidates) {
  grid.validate();
  params.validate();
  if (candidates != nullptr && !(candidates->grid == grid))
    throw ShapeError("basin_of_attraction: candidate mask is on a different grid");

  GridMask basin(grid);
  std::vector<std::size_t> cell;
  std::vector<PendulumState> state;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (candidates != nullptr && !candidates->at(idx)) continue;
    const PendulumState s = grid.state(idx);
    if (converged(s, params)) {
      basin.set(idx, true);
      continue;
    }
    cell.push_back(idx);
    state.push_back(s);
  }

  // All live trajectories advance in lockstep so the policy sees one batch per step.
  std::vector<double> actions;
  for (std::size_t t = 0; t < params.basin_max_steps && !cell.empty(); ++t) {
    actions.assign(state.size(), 0.0);
    policy(state, actions);
    std::size_t live = 0;
    for (std::size_t k = 0; k < state.size(); ++k) {
      const double u = saturate(actions[k], params);
      PendulumState next;
      try {
        next = step(state[k], u, params);
      } catch (const SimulationBlowUp&) {
        continue;
      }
      if (converged(next, params)) {
        basin.set(cell[k], true);
        continue;
      }
      cell[live] = cell[k];
      state[live] = next;
      ++live;
    }
    cell.resize(live);
    state.resize(live);
  }
  return basin;
}

GridMask expert_basin(const ExpertController& expert, const StateGrid& grid) {
  return basin_of_attraction(batch_policy([&expert](const PendulumState& s) { return expert(s); }), grid,
                             expert.params);
}

}  // namespace edagger::pendulum
