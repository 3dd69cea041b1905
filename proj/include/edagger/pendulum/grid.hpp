#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include "edagger/pendulum/dynamics.hpp"

namespace edagger::pendulum {

struct Interval {
  double lo;
  double hi;

  bool operator==(const Interval&) const = default;
};

/// Regular grid over (theta, theta_dot), endpoints included. Cells are
/// indexed theta-major: index = i_theta * n_theta_dot + i_theta_dot.
struct StateGrid {
  Interval theta{-std::numbers::pi, std::numbers::pi};
  Interval theta_dot{-5.0, 5.0};
  std::size_t n_theta = 101;
  std::size_t n_theta_dot = 101;

  void validate() const;
  std::size_t size() const { return n_theta * n_theta_dot; }
  std::size_t index(std::size_t i_theta, std::size_t i_theta_dot) const { return i_theta * n_theta_dot + i_theta_dot; }
  double theta_at(std::size_t i_theta) const;
  double theta_dot_at(std::size_t i_theta_dot) const;
  PendulumState state(std::size_t index) const;
  /// Nearest grid node after wrapping theta; nullopt when the state lies
  /// outside the window.
  std::optional<std::size_t> nearest(const PendulumState& state) const;

  bool operator==(const StateGrid&) const = default;
};

/// Boolean field aligned to a StateGrid.
struct GridMask {
  StateGrid grid;
  std::vector<std::uint8_t> cells;

  explicit GridMask(const StateGrid& g, bool fill = false) : grid(g), cells(g.size(), fill ? 1 : 0) {}

  bool at(std::size_t index) const { return cells[index] != 0; }
  void set(std::size_t index, bool value) { cells[index] = value ? 1 : 0; }
  std::size_t count() const;
  /// count() / grid.size()
  double volume() const;

  bool operator==(const GridMask&) const = default;
};

}  // namespace edagger::pendulum
