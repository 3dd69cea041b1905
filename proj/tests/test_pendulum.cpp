#include "doctest.h"

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "edagger/common/errors.hpp"
#include "edagger/common/rng.hpp"
#include "edagger/pendulum/basin.hpp"
#include "edagger/pendulum/dynamics.hpp"
#include "edagger/pendulum/grid.hpp"
#include "edagger/pendulum/lqr.hpp"
#include "edagger/pendulum/simulate.hpp"

using namespace edagger;
using namespace edagger::pendulum;
using std::numbers::pi;

namespace {

const PendulumParams kParams{};
const ExpertController kExpert{};

auto never = [](const PendulumState&) { return false; };

// Forward Euler at step h, Richardson-extrapolated with h/2 to second order.
PendulumState euler_reference(PendulumState s, double u, double horizon, const PendulumParams& p) {
  auto euler = [&](PendulumState x, double h) {
    const auto steps = static_cast<long>(std::llround(horizon / h));
    for (long i = 0; i < steps; ++i) {
      const Derivative d = dynamics_deriv(x, u, p);
      x = {x.theta + h * d.d_theta, x.theta_dot + h * d.d_theta_dot};
    }
    return x;
  };
  const PendulumState coarse = euler(s, 1e-5);
  const PendulumState fine = euler(s, 5e-6);
  return {2.0 * fine.theta - coarse.theta, 2.0 * fine.theta_dot - coarse.theta_dot};
}

double distance(const PendulumState& a, const PendulumState& b) {
  return std::hypot(a.theta - b.theta, a.theta_dot - b.theta_dot);
}

// exp(M) via scaling and squaring of a truncated Taylor series.
Eigen::Matrix3d expm_series(const Eigen::Matrix3d& m) {
  const int squarings = 6;
  const Eigen::Matrix3d scaled = m / std::pow(2.0, squarings);
  Eigen::Matrix3d term = Eigen::Matrix3d::Identity(), sum = Eigen::Matrix3d::Identity();
  for (int k = 1; k <= 20; ++k) {
    term = term * scaled / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

StateGrid small_grid(std::size_t n) {
  StateGrid g;
  g.n_theta = n;
  g.n_theta_dot = n;
  return g;
}

}  // namespace

TEST_CASE("dynamics_deriv examples") {
  auto d = dynamics_deriv({0.0, 0.0}, 0.0, kParams);
  CHECK(d.d_theta == 0.0);
  CHECK(d.d_theta_dot == 0.0);
  d = dynamics_deriv({pi / 2, 0.0}, 0.0, kParams);
  CHECK(d.d_theta == 0.0);
  CHECK(d.d_theta_dot == 10.0);
  d = dynamics_deriv({0.0, 1.0}, 0.5, kParams);
  CHECK(d.d_theta == 1.0);
  CHECK(d.d_theta_dot == 3.0);
}

TEST_CASE("expert_action examples") {
  CHECK(expert_action({0.0, 0.0}, kExpert) == 0.0);
  CHECK(expert_action({pi / 2, 0.0}, kExpert) == -1.0);
  // unsaturated region: hand-evaluated law
  const double th = 0.05, thd = -0.1;
  const double raw = -std::sin(th) - (0.316 * th + 0.175 * thd) / 10.0;
  CHECK(expert_action({th, thd}, kExpert) == doctest::Approx(raw).epsilon(1e-15));
}

TEST_CASE("expert is odd, including under saturation") {
  Rng rng(1);
  for (int i = 0; i < 2000; ++i) {
    const PendulumState s{rng.uniform(-4.0, 4.0), rng.uniform(-8.0, 8.0)};
    const double u = expert_action(s, kExpert);
    CHECK(expert_action({-s.theta, -s.theta_dot}, kExpert) == -u);
    CHECK(u >= kParams.u_min);
    CHECK(u <= kParams.u_max);
  }
}

TEST_CASE("linearized closed loop is Hurwitz for the default gains") {
  Eigen::Matrix2d a;
  a << 0.0, 1.0, -kExpert.gains[0], -kParams.b - kExpert.gains[1];
  const Eigen::Vector2cd ev = a.eigenvalues();
  for (Eigen::Index i = 0; i < 2; ++i) CHECK(ev(i).real() < 0.0);
}

TEST_CASE("LQR gain matches the closed form and a Riccati ODE integration") {
  Eigen::MatrixXd A(2, 2), B(2, 1), Q = Eigen::MatrixXd::Identity(2, 2), R(1, 1);
  A << 0.0, 1.0, 0.0, -2.0;
  B << 0.0, 1.0;
  R << 10.0;
  const Eigen::MatrixXd K = lqr_gain(A, B, Q, R);
  const double k1 = std::sqrt(0.1);
  const double k2 = (-40.0 + std::sqrt(1640.0 + 80.0 * std::sqrt(10.0))) / 20.0;
  CHECK(K(0, 0) == doctest::Approx(k1).epsilon(1e-10));
  CHECK(K(0, 1) == doctest::Approx(k2).epsilon(1e-10));
  CHECK(std::abs(K(0, 0) - 0.316) < 1e-3);
  CHECK(std::abs(K(0, 1) - 0.175) < 1e-3);

  // dP/dt = A'P + PA - P B R^-1 B' P + Q from P = 0 settles on the stabilizing solution.
  Eigen::Matrix2d p = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d a2 = A, q2 = Q;
  Eigen::Vector2d b2 = B.col(0);
  auto rhs = [&](const Eigen::Matrix2d& x) -> Eigen::Matrix2d {
    return a2.transpose() * x + x * a2 - x * b2 * b2.transpose() * x / 10.0 + q2;
  };
  const double h = 0.01;
  for (int i = 0; i < 20000; ++i) {
    const Eigen::Matrix2d r1 = rhs(p);
    const Eigen::Matrix2d r2 = rhs(p + 0.5 * h * r1);
    const Eigen::Matrix2d r3 = rhs(p + 0.5 * h * r2);
    const Eigen::Matrix2d r4 = rhs(p + h * r3);
    p += h / 6.0 * (r1 + 2.0 * r2 + 2.0 * r3 + r4);
  }
  const Eigen::MatrixXd P = solve_care(A, B, Q, R);
  CHECK((P - Eigen::MatrixXd(p)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(p(0, 1) / 10.0 == doctest::Approx(K(0, 0)).epsilon(1e-9));
  CHECK(p(1, 1) / 10.0 == doctest::Approx(K(0, 1)).epsilon(1e-9));
}

TEST_CASE("solve_care rejects unstabilizable pairs") {
  Eigen::MatrixXd A(2, 2), B(2, 1), Q = Eigen::MatrixXd::Identity(2, 2), R(1, 1);
  A << 1.0, 0.0, 0.0, 1.0;
  B << 1.0, 0.0;  // second unstable mode unreachable
  R << 1.0;
  CHECK_THROWS(solve_care(A, B, Q, R));
}

TEST_CASE("step: equilibrium is a fixed point") {
  CHECK(step({0.0, 0.0}, 0.0, kParams) == PendulumState{0.0, 0.0});
}

TEST_CASE("step: RK4 error drops at least 8x when dt halves") {
  for (const PendulumState s0 : {PendulumState{1.0, 0.5}, PendulumState{-2.0, 3.0}, PendulumState{0.3, -4.0}}) {
    for (double u : {-1.0, 0.3}) {
      PendulumParams coarse = kParams;
      coarse.dt = 0.2;
      PendulumParams fine = kParams;
      fine.dt = 0.1;
      const PendulumState ref = euler_reference(s0, u, 0.2, kParams);
      const double e1 = distance(step(s0, u, coarse), ref);
      const double e2 = distance(step(step(s0, u, fine), u, fine), ref);
      CAPTURE(s0.theta);
      CAPTURE(u);
      CHECK(e1 > 0.0);
      CHECK(e1 / e2 >= 8.0);
    }
  }
}

TEST_CASE("step: linear case matches the matrix exponential over 1 s") {
  PendulumParams p = kParams;
  p.a = 0.0;
  const double u = 0.4;
  const PendulumState s0{0.2, -1.5};
  PendulumState s = s0;
  for (int i = 0; i < 20; ++i) s = step(s, u, p);
  // augmented state (theta, theta_dot, 1) absorbs the constant input
  Eigen::Matrix3d m;
  m << 0.0, 1.0, 0.0, 0.0, -p.b, p.c * u, 0.0, 0.0, 0.0;
  const Eigen::Vector3d exact = expm_series(m) * Eigen::Vector3d(s0.theta, s0.theta_dot, 1.0);
  CHECK(std::abs(s.theta - exact(0)) < 1e-6);
  CHECK(std::abs(s.theta_dot - exact(1)) < 1e-6);
}

TEST_CASE("step: non-finite state throws") {
  PendulumParams p = kParams;
  p.c = 1e308;
  CHECK_THROWS_AS(step({0.0, 1e308}, 1.0, p), SimulationBlowUp);
}

TEST_CASE("params validation") {
  PendulumParams p;
  p.u_min = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.dt = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK_NOTHROW(PendulumParams{}.validate());
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(pi) == pi);
  CHECK(wrap_angle(-pi) == pi);
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(3.0 * pi / 2) == doctest::Approx(-pi / 2));
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const double t = rng.uniform(-50.0, 50.0);
    const double w = wrap_angle(t);
    CHECK(w > -pi);
    CHECK(w <= pi);
    CHECK(std::abs(std::remainder(t - w, 2.0 * pi)) < 1e-9);
  }
}

TEST_CASE("simulate: zero policy from equilibrium stays put") {
  const Trajectory t = simulate([](const PendulumState&) { return 0.0; }, {0.0, 0.0}, kParams, never);
  CHECK(t.transitions() == kParams.max_steps);
  CHECK(t.states.size() == t.transitions() + 1);
  CHECK(t.actors.size() == t.transitions());
  for (const auto& s : t.states) CHECK(s == PendulumState{0.0, 0.0});
}

TEST_CASE("simulate: expert converges from (0.3, 0) but not from (pi, 0)") {
  auto stop = [](const PendulumState& s) { return converged(s, kParams); };
  const Trajectory near = simulate(kExpert, {0.3, 0.0}, kParams, stop, kParams.basin_max_steps);
  CHECK(near.terminated_early);
  CHECK(std::hypot(wrap_angle(near.states.back().theta), near.states.back().theta_dot) < 0.05);

  const Trajectory far = simulate(kExpert, {pi, 0.0}, kParams, stop, kParams.basin_max_steps);
  CHECK_FALSE(far.terminated_early);
  for (double u : far.actions) {
    CHECK(u >= -1.0);
    CHECK(u <= 1.0);
  }
}

TEST_CASE("simulate: actions are saturated and actors recorded") {
  const Trajectory t = simulate([](const PendulumState&) { return Control{5.0, Actor::Novice}; }, {0.0, 0.0},
                                kParams, never, 10);
  CHECK(t.transitions() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(t.actions[i] == 1.0);
    CHECK(t.actors[i] == Actor::Novice);
  }
  const Trajectory e = simulate([](const PendulumState&) { return -3.0; }, {0.1, 0.0}, kParams, never, 3);
  CHECK(e.actions == std::vector<double>{-1.0, -1.0, -1.0});
  CHECK(e.actors[0] == Actor::Expert);
}

TEST_CASE("trajectory CSV layout") {
  const Trajectory t = simulate(kExpert, {0.2, 0.1}, kParams, never, 2);
  const auto path = std::filesystem::temp_directory_path() / "edagger_traj_test.csv";
  write_trajectory_csv(path, t);
  std::ifstream in(path);
  std::string header, line;
  std::getline(in, header);
  CHECK(header == "step,theta,theta_dot,action,actor");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  CHECK(rows == 3);
  CHECK(last.substr(last.size() - 2) == ",,");
  std::filesystem::remove(path);
}

TEST_CASE("grid geometry, nearest and wrap") {
  const StateGrid g = small_grid(5);
  CHECK(g.size() == 25);
  CHECK(g.theta_at(0) == -pi);
  CHECK(g.theta_at(4) == pi);
  CHECK(g.theta_dot_at(2) == 0.0);
  CHECK(g.state(g.index(2, 2)) == PendulumState{0.0, 0.0});
  CHECK(g.nearest({0.01, -0.02}) == g.index(2, 2));
  CHECK(g.nearest({0.01 + 2.0 * pi, -0.02}) == g.index(2, 2));
  CHECK(g.nearest({0.0, 5.5}) == std::nullopt);
  CHECK(g.nearest({pi / 2 - 0.1, 2.4}) == g.index(3, 3));
  StateGrid bad = g;
  bad.n_theta = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("basin: zero policy keeps little beyond the equilibrium cell") {
  const StateGrid g = small_grid(21);
  const GridMask m = basin_of_attraction(batch_policy([](const PendulumState&) { return 0.0; }), g, kParams);
  CHECK(m.at(g.index(10, 10)));
  CHECK(m.count() <= 3);
}

TEST_CASE("basin: expert basin holds the origin and is odd-symmetric") {
  const StateGrid g = small_grid(31);
  const GridMask m = expert_basin(kExpert, g);
  CHECK(m.at(g.index(15, 15)));
  CHECK(m.count() > 10);
  CHECK(m.count() < g.size());
  for (std::size_t i = 0; i < g.n_theta; ++i)
    for (std::size_t j = 0; j < g.n_theta_dot; ++j)
      CHECK(m.at(g.index(i, j)) == m.at(g.index(g.n_theta - 1 - i, g.n_theta_dot - 1 - j)));
}

TEST_CASE("basin agrees with per-cell simulation, is deterministic and candidate-consistent") {
  const StateGrid g = small_grid(15);
  const GridMask m = expert_basin(kExpert, g);
  CHECK(expert_basin(kExpert, g) == m);
  auto stop = [](const PendulumState& s) { return converged(s, kParams); };
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const Trajectory t = simulate(kExpert, g.state(idx), kParams, stop, kParams.basin_max_steps);
    CHECK(m.at(idx) == t.terminated_early);
  }
  GridMask half(g);
  for (std::size_t idx = 0; idx < g.size(); idx += 2) half.set(idx, true);
  const GridMask sub = basin_of_attraction(batch_policy(kExpert), g, kParams, &half);
  for (std::size_t idx = 0; idx < g.size(); ++idx) CHECK(sub.at(idx) == (half.at(idx) && m.at(idx)));
  GridMask other(small_grid(5));
  CHECK_THROWS_AS(basin_of_attraction(batch_policy(kExpert), g, kParams, &other), ShapeError);
}

TEST_CASE("default sampling box lies inside the expert basin") {
  const StateGrid g = small_grid(101);
  const GridMask m = expert_basin(kExpert, g);
  for (std::size_t idx = 0; idx < g.size(); ++idx) {
    const PendulumState s = g.state(idx);
    if (std::abs(s.theta) <= 0.6 && std::abs(s.theta_dot) <= 1.5) CHECK(m.at(idx));
  }
}
