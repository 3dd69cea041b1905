#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace edagger::pendulum {

/// theta = 0 is upright; theta is stored unwrapped.
struct PendulumState {
  double theta = 0.0;      // rad
  double theta_dot = 0.0;  // rad/s

  bool operator==(const PendulumState&) const = default;
};

/// theta_ddot = a sin(theta) - b theta_dot + c u, u saturated to [u_min, u_max],
/// integrated with classical RK4 (u held over the step).
struct PendulumParams {
  double a = 10.0;
  double b = 2.0;
  double c = 10.0;
  double u_min = -1.0;
  double u_max = 1.0;
  double dt = 0.05;
  std::size_t max_steps = 100;         // DAgger trajectory length
  std::size_t basin_max_steps = 500;   // horizon for basin-of-attraction checks
  double convergence_radius = 0.05;    // on (wrapped theta, theta_dot)

  void validate() const;
};

enum class Actor : std::uint8_t { Novice, Expert };

struct Derivative {
  double d_theta;
  double d_theta_dot;
};

Derivative dynamics_deriv(const PendulumState& state, double u, const PendulumParams& params);

double saturate(double u, const PendulumParams& params);

/// Wraps to (-pi, pi].
double wrap_angle(double theta);

/// |(wrap(theta), theta_dot)| < convergence_radius.
bool converged(const PendulumState& state, const PendulumParams& params);

/// One RK4 step of length params.dt. Throws SimulationBlowUp on a non-finite result.
PendulumState step(const PendulumState& state, double u, const PendulumParams& params);

/// Saturated feedback-linearizing controller:
/// u = clamp(-(a/c) sin(theta) - (K1 theta + K2 theta_dot) / c).
struct ExpertController {
  std::array<double, 2> gains = {0.316, 0.175};
  PendulumParams params;

  double operator()(const PendulumState& state) const;
};

double expert_action(const PendulumState& state, const ExpertController& controller);

}  // namespace edagger::pendulum
