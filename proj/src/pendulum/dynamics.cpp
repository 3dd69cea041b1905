#include "edagger/pendulum/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "edagger/common/errors.hpp"

namespace edagger::pendulum {

void PendulumParams::validate() const {
  if (!(u_min < u_max)) throw ConfigError("pendulum: u_min must be < u_max");
  if (!(dt > 0.0)) throw ConfigError("pendulum: dt must be positive");
  if (!(convergence_radius > 0.0)) throw ConfigError("pendulum: convergence_radius must be positive");
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw ConfigError("pendulum: a, b, c must be finite");
  }
}

Derivative dynamics_deriv(const PendulumState& s, double u, const PendulumParams& p) {
  return {s.theta_dot, p.a * std::sin(s.theta) - p.b * s.theta_dot + p.c * u};
}

double saturate(double u, const PendulumParams& p) { return std::clamp(u, p.u_min, p.u_max); }

double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(theta + std::numbers::pi, two_pi);
  if (w < 0.0) w += two_pi;
  w -= std::numbers::pi;
  // fmod maps +pi to -pi; keep the interval half-open at -pi.
  return w == -std::numbers::pi ? std::numbers::pi : w;
}

bool converged(const PendulumState& s, const PendulumParams& p) {
  return std::hypot(wrap_angle(s.theta), s.theta_dot) < p.convergence_radius;
}

PendulumState step(const PendulumState& s, double u, const PendulumParams& p) {
  const double h = p.dt;
  const Derivative k1 = dynamics_deriv(s, u, p);
  const Derivative k2 = dynamics_deriv({s.theta + 0.5 * h * k1.d_theta, s.theta_dot + 0.5 * h * k1.d_theta_dot}, u, p);
  const Derivative k3 = dynamics_deriv({s.theta + 0.5 * h * k2.d_theta, s.theta_dot + 0.5 * h * k2.d_theta_dot}, u, p);
  const Derivative k4 = dynamics_deriv({s.theta + h * k3.d_theta, s.theta_dot + h * k3.d_theta_dot}, u, p);
  const PendulumState next{
      s.theta + h / 6.0 * (k1.d_theta + 2.0 * k2.d_theta + 2.0 * k3.d_theta + k4.d_theta),
      s.theta_dot + h / 6.0 * (k1.d_theta_dot + 2.0 * k2.d_theta_dot + 2.0 * k3.d_theta_dot + k4.d_theta_dot),
  };
  if (!std::isfinite(next.theta) || !std::isfinite(next.theta_dot)) {
    throw SimulationBlowUp("pendulum state became non-finite");
  }
  return next;
}

double ExpertController::operator()(const PendulumState& s) const {
  const double raw = -(params.a / params.c) * std::sin(s.theta) -
                     (gains[0] * s.theta + gains[1] * s.theta_dot) / params.c;
  return saturate(raw, params);
}

double expert_action(const PendulumState& state, const ExpertController& controller) {
  return controller(state);
}

}  // namespace edagger::pendulum
