#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "edagger/analysis/analysis.hpp"
#include "edagger/common/errors.hpp"

using namespace edagger;
using namespace edagger::analysis;
using pendulum::PendulumState;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

StateGrid grid_n(std::size_t n) {
  StateGrid g;
  g.n_theta = n;
  g.n_theta_dot = n;
  return g;
}

// Small ensemble fitted to expert labels inside the sampling box.
const uq::EnsemblePolicy& trained_novice() {
  static const uq::EnsemblePolicy policy = [] {
    const pendulum::ExpertController expert;
    Rng rng(10);
    nn::Matrix x(300, 2), y(300, 1);
    for (std::size_t i = 0; i < 300; ++i) {
      const PendulumState s{rng.uniform(-0.6, 0.6), rng.uniform(-1.5, 1.5)};
      x(i, 0) = s.theta;
      x(i, 1) = s.theta_dot;
      y(i, 0) = expert(s);
    }
    nn::TrainConfig cfg;
    cfg.epochs = 60;
    cfg.batch_size = 32;
    cfg.learning_rate = 3e-3;
    cfg.rng_seed = 4;
    return uq::train_ensemble(
        uq::EnsemblePolicy::initialized({2, 16, 16, 1}, nn::Activation::Tanh, nn::OutputHead::PointEstimate, 4, 5), x,
        y, cfg);
  }();
  return policy;
}

const GridStatistics& trained_stats() {
  static const GridStatistics stats = grid_statistics(trained_novice(), pendulum::ExpertController{}, grid_n(101));
  return stats;
}

GridMask random_mask(const StateGrid& g, Rng& rng, double p) {
  GridMask m(g);
  for (std::size_t i = 0; i < g.size(); ++i) m.set(i, rng.bernoulli(p));
  return m;
}

const GridMask& default_expert_basin() {
  static const GridMask basin = pendulum::expert_basin(pendulum::ExpertController{}, grid_n(101));
  return basin;
}

}  // namespace

TEST_CASE("permitted_volume examples") {
  const StateGrid g = grid_n(10);
  CHECK(permitted_volume(GridMask(g, true)) == 1.0);
  CHECK(permitted_volume(GridMask(g, false)) == 0.0);
  GridMask checker(g);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) checker.set(g.index(i, j), (i + j) % 2 == 0);
  CHECK(permitted_volume(checker) == 0.5);
}

TEST_CASE("learning_performance examples") {
  Rng rng(1);
  const StateGrid g = grid_n(20);
  const GridMask expert = random_mask(g, rng, 0.4);
  CHECK(learning_performance(expert, expert) == expert.volume());
  GridMask complement(g);
  for (std::size_t i = 0; i < g.size(); ++i) complement.set(i, !expert.at(i));
  CHECK(learning_performance(complement, expert) == 0.0);
  GridMask subset(g);
  for (std::size_t i = 0; i < g.size(); ++i) subset.set(i, expert.at(i) && rng.bernoulli(0.5));
  CHECK(learning_performance(subset, expert) == subset.volume());
  CHECK_THROWS_AS(learning_performance(GridMask(grid_n(5)), expert), ShapeError);
}

TEST_CASE("failure_of_trajectory examples") {
  const GridMask& basin = default_expert_basin();
  const pendulum::ExpertController expert;
  const auto never = [](const PendulumState&) { return false; };

  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const PendulumState x0{rng.uniform(-0.6, 0.6), rng.uniform(-1.5, 1.5)};
    CHECK_FALSE(failure_of_trajectory(pendulum::simulate(expert, x0, expert.params, never), basin));
  }

  pendulum::Trajectory only_start;
  only_start.states = {{0.1, 0.2}};
  CHECK_FALSE(failure_of_trajectory(only_start, basin));

  pendulum::Trajectory bad = pendulum::simulate(expert, {0.1, 0.2}, expert.params, never, 5);
  bad.states.push_back({std::numbers::pi, 4.9});
  CHECK(failure_of_trajectory(bad, basin));

  pendulum::Trajectory outside;
  outside.states = {{0.0, 0.0}, {0.0, 5.5}};
  CHECK(failure_of_trajectory(outside, basin));

  // extending a failing trajectory keeps it failing
  bad.states.push_back({0.0, 0.0});
  CHECK(failure_of_trajectory(bad, basin));
}

TEST_CASE("failure_rate examples") {
  CHECK(failure_rate(std::span<const bool>()) == 0.0);
  bool flags[30] = {};
  CHECK(failure_rate(flags) == 0.0);
  flags[3] = flags[10] = flags[29] = true;
  CHECK(failure_rate(flags) == doctest::Approx(0.1));
  std::fill(std::begin(flags), std::end(flags), true);
  CHECK(failure_rate(flags) == 1.0);
}

TEST_CASE("grid_statistics agrees with per-state prediction") {
  const auto& novice = trained_novice();
  const pendulum::ExpertController expert;
  const StateGrid g = grid_n(9);
  const GridStatistics stats = grid_statistics(novice, expert, g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const PendulumState s = g.state(i);
    const auto d = uq::ensemble_predict(novice, std::vector<double>{s.theta, s.theta_dot});
    CHECK(stats.novice_mean[i] == doctest::Approx(d.mean[0]).epsilon(1e-13));
    CHECK(stats.doubt[i] == doctest::Approx(d.variance[0]).epsilon(1e-10));
    const double e = d.mean[0] - expert(s);
    CHECK(stats.discrepancy_sq[i] == doctest::Approx(e * e).epsilon(1e-10));
  }
}

TEST_CASE("permitted_set: limits, intersection law and Vanilla") {
  const GridStatistics& stats = trained_stats();
  CHECK(permitted_volume(permitted_set(dagger::DiscrepancyRule{kInf}, stats)) == 1.0);
  CHECK(permitted_volume(permitted_set(dagger::DoubtRule{kInf}, stats)) == 1.0);
  CHECK(permitted_volume(permitted_set(dagger::DoubtRule{0.0}, stats)) == 0.0);
  CHECK_THROWS_AS(permitted_set(dagger::VanillaRule{}, stats), dagger::UnsupportedRule);

  Rng rng(6);
  for (int i = 0; i < 25; ++i) {
    const double tau = std::pow(10.0, rng.uniform(-6, 0)), chi = std::pow(10.0, rng.uniform(-8, -2));
    const GridMask a = permitted_set(dagger::DiscrepancyRule{tau}, stats);
    const GridMask b = permitted_set(dagger::DoubtRule{chi}, stats);
    const GridMask e = permitted_set(dagger::EnsembleRule{tau, chi}, stats);
    for (std::size_t c = 0; c < e.cells.size(); ++c) CHECK(e.at(c) == (a.at(c) && b.at(c)));
    CHECK(e.volume() <= std::min(a.volume(), b.volume()));
  }
}

TEST_CASE("permitted_set: monotone in the threshold") {
  const GridStatistics& stats = trained_stats();
  for (const ThresholdKind kind : {ThresholdKind::Discrepancy, ThresholdKind::Doubt}) {
    GridMask prev = permitted_set(make_rule(kind, 0.0), stats);
    for (double t = 1e-9; t < 10.0; t *= 3.0) {
      const GridMask next = permitted_set(make_rule(kind, t), stats);
      for (std::size_t c = 0; c < next.cells.size(); ++c)
        if (prev.at(c)) CHECK(next.at(c));
      prev = next;
    }
  }
}

TEST_CASE("bisection matches the sorting oracle") {
  const GridStatistics& stats = trained_stats();
  for (const ThresholdKind kind : {ThresholdKind::Discrepancy, ThresholdKind::Doubt}) {
    std::vector<double> sorted(statistic(stats, kind).begin(), statistic(stats, kind).end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t k : {10U, 500U, 5000U}) {
      const ThresholdResult r = solve_threshold_for_volume(kind, stats, static_cast<double>(k) / n);
      CAPTURE(k);
      CHECK(r.threshold == sorted[k - 1]);
      CHECK(r.volume == static_cast<double>(k) / n);
    }
  }
}

TEST_CASE("bisection: ties, targets 0 and 1, monotone in the target") {
  Rng rng(8);
  std::vector<double> values(400);
  for (double& v : values) v = std::round(rng.uniform(0.0, 50.0)) / 7.0;  // many ties, some above 1
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  double prev = -1.0;
  for (std::size_t k = 1; k <= values.size(); k += 13) {
    const ThresholdResult r = solve_threshold_for_volume(values, static_cast<double>(k) / 400.0);
    CHECK(r.threshold == sorted[k - 1]);
    CHECK(r.threshold >= prev);
    prev = r.threshold;
  }
  const std::vector<double> positive = {0.5, 2.0, 3.0, 9.0};
  const ThresholdResult zero = solve_threshold_for_volume(positive, 0.0);
  CHECK(zero.volume == 0.0);
  CHECK(zero.threshold < 0.5);
  const ThresholdResult one = solve_threshold_for_volume(positive, 1.0);
  CHECK(one.volume == 1.0);
  CHECK(one.threshold >= 9.0);

  BisectionOptions loose;
  loose.tolerance = 0.1;
  const ThresholdResult coarse = solve_threshold_for_volume(values, 0.5, loose);
  CHECK(std::abs(coarse.volume - 0.5) <= 0.1);
}

TEST_CASE("bisection: infeasible and invalid targets") {
  const std::vector<double> values = {0.1, kInf};
  try {
    solve_threshold_for_volume(values, 1.0);
    FAIL("expected InfeasibleTarget");
  } catch (const InfeasibleTarget& e) {
    CHECK(e.best_volume() == 0.5);
  }
  CHECK_THROWS_AS(solve_threshold_for_volume(values, 1.5), ConfigError);
  CHECK_THROWS_AS(solve_threshold_for_volume(std::vector<double>{}, 0.5), ShapeError);
}

TEST_CASE("novice_basin is the basin of the saturated ensemble mean") {
  const auto& novice = trained_novice();
  const StateGrid g = grid_n(21);
  const pendulum::PendulumParams params;
  const GridMask fast = novice_basin(novice, g, params);
  const auto mean_policy = pendulum::batch_policy([&](const PendulumState& s) {
    return uq::ensemble_predict(novice, std::vector<double>{s.theta, s.theta_dot}).mean[0];
  });
  CHECK(fast == pendulum::basin_of_attraction(mean_policy, g, params));
  CHECK(fast.at(g.index(10, 10)));

  const GridMask single = novice_basin(novice, g, params, nullptr, Precision::Single);
  std::size_t differ = 0;
  for (std::size_t i = 0; i < g.size(); ++i) differ += single.at(i) != fast.at(i);
  CHECK(differ <= g.size() / 100);

  GridMask candidates(g);
  for (std::size_t i = 0; i < g.size(); i += 3) candidates.set(i, true);
  const GridMask sub = novice_basin(novice, g, params, &candidates);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(sub.at(i) == (candidates.at(i) && fast.at(i)));
}

TEST_CASE("mask CSV round trip") {
  Rng rng(3);
  const StateGrid g = grid_n(13);
  const GridMask m = random_mask(g, rng, 0.3);
  const auto path = std::filesystem::temp_directory_path() / "edagger_mask_test.csv";
  write_mask_csv(path, m);
  CHECK(read_mask_csv(path, g) == m);
  CHECK_THROWS_AS(read_mask_csv(path, grid_n(12)), ShapeError);
  std::filesystem::remove(path);
}

TEST_CASE("cached expert basin writes once and reloads") {
  const auto dir = std::filesystem::temp_directory_path() / "edagger_basin_cache_test";
  std::filesystem::remove_all(dir);
  const pendulum::ExpertController expert;
  const StateGrid g = grid_n(15);
  const GridMask first = cached_expert_basin(expert, g, dir);
  CHECK(first == pendulum::expert_basin(expert, g));
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  CHECK(cached_expert_basin(expert, g, dir) == first);
  CHECK(expert_basin_key(expert, g) != expert_basin_key(expert, grid_n(17)));
  pendulum::ExpertController other = expert;
  other.gains[0] = 0.5;
  CHECK(expert_basin_key(expert, g) != expert_basin_key(other, g));
  std::filesystem::remove_all(dir);
}

TEST_CASE("mean nearest dataset distance") {
  const StateGrid g = grid_n(3);  // theta in {-pi, 0, pi}, theta_dot in {-5, 0, 5}
  dagger::Dataset d(2, 1);
  d.append(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0});
  GridMask m(g);
  CHECK_FALSE(mean_nearest_dataset_distance(m, d).has_value());
  m.set(g.index(1, 1), true);  // (0, 0): distance 1
  m.set(g.index(1, 2), true);  // (0, 5): distance 4
  CHECK(*mean_nearest_dataset_distance(m, d) == doctest::Approx(2.5));
  CHECK_FALSE(mean_nearest_dataset_distance(m, dagger::Dataset(2, 1)).has_value());
}
