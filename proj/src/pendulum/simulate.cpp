#include "edagger/pendulum/simulate.hpp"

#include "edagger/common/csv.hpp"

namespace edagger::pendulum {

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  CsvWriter csv(path, {"step", "theta", "theta_dot", "action", "actor"});
  for (std::size_t t = 0; t < traj.states.size(); ++t) {
    csv.cell(t).cell(traj.states[t].theta).cell(traj.states[t].theta_dot);
    if (t < traj.actions.size()) {
      csv.cell(traj.actions[t]).cell(traj.actors[t] == Actor::Novice ? "novice" : "expert");
    } else {
      csv.empty().empty();
    }
    csv.end_row();
  }
}

}  // namespace edagger::pendulum
