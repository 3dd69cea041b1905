#include "edagger/pendulum/grid.hpp"

#include <algorithm>
#include <cmath>

#include "edagger/common/errors.hpp"

namespace edagger::pendulum {

namespace {

double linspace_at(const Interval& range, std::size_t n, std::size_t i) {
  if (i + 1 == n) return range.hi;
  return range.lo + (range.hi - range.lo) * static_cast<double>(i) / static_cast<double>(n - 1);
}

std::optional<std::size_t> nearest_index(const Interval& range, std::size_t n, double x) {
  if (!(x >= range.lo && x <= range.hi)) return std::nullopt;
  const double pos = (x - range.lo) / (range.hi - range.lo) * static_cast<double>(n - 1);
  const auto i = static_cast<std::size_t>(std::lround(pos));
  return std::min(i, n - 1);
}

}  // namespace

void StateGrid::validate() const {
  if (n_theta < 2 || n_theta_dot < 2) throw ConfigError("grid resolution must be at least 2 per axis");
  if (!(theta.lo < theta.hi) || !(theta_dot.lo < theta_dot.hi))
    throw ConfigError("grid ranges must satisfy lo < hi");
  if (!std::isfinite(theta.lo) || !std::isfinite(theta.hi) || !std::isfinite(theta_dot.lo) ||
      !std::isfinite(theta_dot.hi))
    throw ConfigError("grid ranges must be finite");
}

double StateGrid::theta_at(std::size_t i_theta) const { return linspace_at(theta, n_theta, i_theta); }

double StateGrid::theta_dot_at(std::size_t i_theta_dot) const {
  return linspace_at(theta_dot, n_theta_dot, i_theta_dot);
}

PendulumState StateGrid::state(std::size_t index) const {
  return {theta_at(index / n_theta_dot), theta_dot_at(index % n_theta_dot)};
}

std::optional<std::size_t> StateGrid::nearest(const PendulumState& s) const {
  const auto i = nearest_index(theta, n_theta, wrap_angle(s.theta));
  const auto j = nearest_index(theta_dot, n_theta_dot, s.theta_dot);
  if (!i || !j) return std::nullopt;
  return index(*i, *j);
}

std::size_t GridMask::count() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](std::uint8_t c) { return c != 0; }));
}

double GridMask::volume() const {
  return static_cast<double>(count()) / static_cast<double>(cells.size());
}

}  // namespace edagger::pendulum
