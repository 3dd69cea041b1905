#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "edagger/common/errors.hpp"
#include "edagger/dagger/dagger.hpp"
#include "edagger/dagger/decision.hpp"

using namespace edagger;
using namespace edagger::dagger;
using pendulum::PendulumState;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

uq::PredictiveDistribution dist(double mean, double variance) { return {{mean}, {variance}}; }

Decision decide1(const DecisionRule& rule, double mean, double variance, double expert, std::size_t epoch = 1) {
  Rng rng(0);
  return decide(rule, dist(mean, variance), std::vector<double>{expert}, epoch, rng);
}

DaggerConfig tiny_config() {
  DaggerConfig c;
  c.epochs = 2;
  c.ensemble.members = 3;
  c.ensemble.hidden = {8};
  c.train.epochs = 5;
  c.train.batch_size = 16;
  c.seeds.initial_conditions = 5;
  c.seeds.run = 6;
  return c;
}

uq::EnsemblePolicy tiny_novice(std::uint64_t seed) {
  return uq::EnsemblePolicy::initialized({2, 8, 1}, nn::Activation::Tanh, nn::OutputHead::PointEstimate, 3, seed);
}

}  // namespace

TEST_CASE("decide: examples") {
  const Decision v = decide1(VanillaRule{1.0, 0.5}, 0.3, 0.0, 0.1, 0);
  CHECK(v.actor == Actor::Expert);
  CHECK(v.chosen_action == std::vector<double>{0.1});

  const Decision d = decide1(DiscrepancyRule{0.2}, 0.5, 0.0, 0.0);
  CHECK(d.discrepancy_sq == 0.25);
  CHECK(d.actor == Actor::Expert);

  const Decision e = decide1(EnsembleRule{1.0, 0.1}, 0.5 + std::sqrt(0.5), 0.05, 0.5);
  CHECK(e.discrepancy_sq == doctest::Approx(0.5));
  CHECK(e.doubt == 0.05);
  CHECK(e.actor == Actor::Novice);
  CHECK(e.chosen_action == std::vector<double>{0.5 + std::sqrt(0.5)});
}

TEST_CASE("decide: every rule records discrepancy and doubt") {
  for (const DecisionRule& r : {DecisionRule{VanillaRule{}}, DecisionRule{DiscrepancyRule{}},
                                DecisionRule{DoubtRule{}}, DecisionRule{EnsembleRule{}}}) {
    const Decision d = decide1(r, 1.0, 0.4, 0.0, 3);
    CHECK(d.discrepancy_sq == 1.0);
    CHECK(d.doubt == 0.4);
  }
}

TEST_CASE("decide: novice acting implies the rule held") {
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const double mean = rng.uniform(-1, 1), var = rng.uniform(0, 0.01), expert = rng.uniform(-1, 1);
    const double tau = rng.uniform(0, 0.5), chi = rng.uniform(0, 0.01);
    const Decision e = decide1(EnsembleRule{tau, chi}, mean, var, expert);
    const Decision a = decide1(DiscrepancyRule{tau}, mean, var, expert);
    const Decision b = decide1(DoubtRule{chi}, mean, var, expert);
    CHECK((e.actor == Actor::Novice) == (a.actor == Actor::Novice && b.actor == Actor::Novice));
    if (e.actor == Actor::Novice) {
      CHECK(e.discrepancy_sq <= tau);
      CHECK(e.doubt <= chi);
    }
  }
}

TEST_CASE("permits: monotone thresholds and infinite limits") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double disc = rng.uniform(0, 2), doubt = rng.uniform(0, 2);
    const double t1 = rng.uniform(0, 2), t2 = t1 + rng.uniform(0, 1);
    if (permits(DiscrepancyRule{t1}, disc, doubt)) CHECK(permits(DiscrepancyRule{t2}, disc, doubt));
    if (permits(DoubtRule{t1}, disc, doubt)) CHECK(permits(DoubtRule{t2}, disc, doubt));
    CHECK(permits(DiscrepancyRule{kInf}, disc, doubt));
    CHECK(permits(DoubtRule{kInf}, disc, doubt));
  }
  CHECK_THROWS_AS(permits(VanillaRule{}, 0.0, 0.0), UnsupportedRule);
}

TEST_CASE("vanilla beta schedule stays inside binomial 3-sigma bounds") {
  const VanillaRule rule{0.8, 0.5};
  Rng rng(17);
  const int n = 10000;
  for (std::size_t epoch = 0; epoch < 5; ++epoch) {
    const double beta = std::pow(0.5, static_cast<double>(epoch)) * 0.8;
    int expert = 0;
    for (int i = 0; i < n; ++i) {
      expert += decide(rule, dist(0.0, 0.0), std::vector<double>{1.0}, epoch, rng).actor == Actor::Expert;
    }
    const double sigma = std::sqrt(beta * (1.0 - beta) / n);
    CAPTURE(epoch);
    CHECK(std::abs(static_cast<double>(expert) / n - beta) <= 3.0 * sigma);
  }
}

TEST_CASE("rule validation and naming") {
  CHECK_THROWS_AS(validate(VanillaRule{1.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(validate(VanillaRule{1.0, 1.0}), ConfigError);
  CHECK_THROWS_AS(validate(DiscrepancyRule{-0.1}), ConfigError);
  CHECK_THROWS_AS(validate(DoubtRule{std::nan("")}), ConfigError);
  CHECK_NOTHROW(validate(EnsembleRule{kInf, kInf}));
  CHECK(kind_name(EnsembleRule{}) == "ensemble");
  CHECK(describe(DoubtRule{0.001}) == "doubt(chi=0.001)");
}

TEST_CASE("dataset is append-only and validated") {
  Dataset d(2, 1);
  d.append(std::vector<double>{0.1, 0.2}, std::vector<double>{0.3});
  Dataset more(2, 1);
  more.append(std::vector<double>{1.0, 2.0}, std::vector<double>{-0.5});
  d.append(more);
  CHECK(d.size() == 2);
  CHECK(d.observations()(0, 1) == 0.2);
  CHECK(d.actions()(1, 0) == -0.5);
  CHECK_THROWS_AS(d.append(std::vector<double>{0.1}, std::vector<double>{0.3}), ShapeError);
  CHECK_THROWS_AS(d.append(std::vector<double>{0.1, kInf}, std::vector<double>{0.3}), ShapeError);
  CHECK(d.size() == 2);
}

TEST_CASE("run_epoch: epoch 0 is expert-only and labels every visited state") {
  PendulumEnv env;
  Rng rng(1);
  const EpochResult r = run_epoch(nullptr, env, DoubtRule{}, 0, {0.4, -0.5}, rng);
  CHECK(r.record.trajectory_len == r.trajectory.states.size() - 1);
  CHECK(r.delta.size() == r.record.trajectory_len);
  CHECK(r.record.novice_action_fraction == 0.0);
  for (Actor a : r.trajectory.actors) CHECK(a == Actor::Expert);
  for (std::size_t t = 0; t < r.delta.size(); ++t) {
    const PendulumState s{r.delta.observations()(t, 0), r.delta.observations()(t, 1)};
    CHECK(s == r.trajectory.states[t]);
    CHECK(r.delta.actions()(t, 0) == env.expert(s));
  }
}

TEST_CASE("run_epoch: labels are the expert's even when the novice acts") {
  PendulumEnv env;
  env.stop_on_convergence = false;
  const uq::EnsemblePolicy novice = tiny_novice(4);
  Rng rng(1);
  const EpochResult r = run_epoch(&novice, env, DiscrepancyRule{kInf}, 1, {0.2, 0.1}, rng);
  CHECK(r.record.novice_action_fraction == 1.0);
  CHECK(r.record.trajectory_len == env.expert.params.max_steps);
  for (std::size_t t = 0; t < r.delta.size(); ++t) {
    const PendulumState s{r.delta.observations()(t, 0), r.delta.observations()(t, 1)};
    CHECK(r.delta.actions()(t, 0) == env.expert(s));
  }
}

TEST_CASE("run_epoch: unbounded discrepancy matches vanilla with beta0 = 0") {
  PendulumEnv env;
  const uq::EnsemblePolicy novice = tiny_novice(8);
  Rng a(3), b(3);
  const EpochResult d = run_epoch(&novice, env, DiscrepancyRule{kInf}, 2, {-0.3, 0.7}, a);
  const EpochResult v = run_epoch(&novice, env, VanillaRule{0.0, 0.5}, 2, {-0.3, 0.7}, b);
  CHECK(d.trajectory.actors == v.trajectory.actors);
  CHECK(d.trajectory.actions == v.trajectory.actions);
}

TEST_CASE("run_epoch: fixed seed gives identical records") {
  PendulumEnv env;
  const uq::EnsemblePolicy novice = tiny_novice(9);
  Rng a(7), b(7);
  const EpochResult x = run_epoch(&novice, env, VanillaRule{0.7, 0.5}, 1, {0.1, 0.1}, a);
  const EpochResult y = run_epoch(&novice, env, VanillaRule{0.7, 0.5}, 1, {0.1, 0.1}, b);
  CHECK(x.record.trajectory_len == y.record.trajectory_len);
  CHECK(x.record.novice_action_fraction == y.record.novice_action_fraction);
  CHECK(x.trajectory.states == y.trajectory.states);
}

TEST_CASE("run_epoch: failure check and blow-up are recorded") {
  PendulumEnv env;
  Rng rng(1);
  const EpochResult r =
      run_epoch(nullptr, env, DoubtRule{}, 0, {0.4, 0.0}, rng, [](const pendulum::Trajectory&) { return true; });
  CHECK(r.record.failure);
  CHECK_FALSE(r.record.blew_up);

  PendulumEnv wild = env;
  wild.expert.params.c = 1e308;
  wild.expert.params.u_min = 1.0;
  wild.expert.params.u_max = 2.0;
  const EpochResult w = run_epoch(nullptr, wild, DoubtRule{}, 0, {0.0, 1e308}, rng);
  CHECK(w.record.blew_up);
  CHECK(w.record.failure);
  CHECK(w.trajectory.actions.size() + 1 == w.trajectory.states.size());
}

TEST_CASE("run_dagger: vanilla with beta0 = 1 over one gated epoch") {
  // beta_1 = lambda, so epoch 1 hands the novice about 1 - lambda of the steps.
  DaggerConfig c = tiny_config();
  c.epochs = 1;
  c.rule = VanillaRule{1.0, 0.3};
  const DaggerResult r = run_dagger(c);
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0].novice_action_fraction == 0.0);
  const double n = static_cast<double>(r.records[1].trajectory_len);
  CHECK(std::abs(r.records[1].novice_action_fraction - 0.7) <= 4.0 * std::sqrt(0.21 / n));
  CHECK(r.dataset.size() == r.records[0].trajectory_len + r.records[1].trajectory_len);
  CHECK(r.novice.has_value());
}

TEST_CASE("run_dagger: dataset grows by each trajectory and is reproducible") {
  DaggerConfig c = tiny_config();
  c.trajectories_per_epoch = 2;
  c.rule = DiscrepancyRule{0.05};
  std::vector<std::size_t> sizes;
  DaggerHooks hooks;
  hooks.on_epoch = [&](const EpochSnapshot& snap) {
    sizes.push_back(snap.dataset.size());
    CHECK(snap.results.size() == 2);
    CHECK((snap.epoch == 0) == (snap.acting_novice == nullptr));
  };
  const DaggerResult r = run_dagger(c, hooks);
  REQUIRE(r.records.size() == 6);
  std::size_t total = 0;
  for (const EpochRecord& rec : r.records) {
    total += rec.trajectory_len;
    CHECK(rec.dataset_size == total);
  }
  CHECK(sizes == std::vector<std::size_t>{r.records[1].dataset_size, r.records[3].dataset_size,
                                          r.records[5].dataset_size});
  const DaggerResult again = run_dagger(c);
  CHECK(*again.novice == *r.novice);
  CHECK(again.dataset.observations() == r.dataset.observations());
}

TEST_CASE("run_dagger: initial conditions do not depend on the rule") {
  DaggerConfig c = tiny_config();
  std::vector<PendulumState> first_a, first_b;
  DaggerHooks ha, hb;
  ha.on_epoch = [&](const EpochSnapshot& s) { first_a.push_back(s.results[0].trajectory.states[0]); };
  hb.on_epoch = [&](const EpochSnapshot& s) { first_b.push_back(s.results[0].trajectory.states[0]); };
  c.rule = DoubtRule{1e-3};
  run_dagger(c, ha);
  c.rule = VanillaRule{0.5, 0.5};
  run_dagger(c, hb);
  CHECK(first_a == first_b);
  CHECK_FALSE(first_a[0] == first_a[1]);
}

TEST_CASE("epoch records CSV") {
  const auto path = std::filesystem::temp_directory_path() / "edagger_records_test.csv";
  const std::vector<EpochRecord> recs = {{0, 100, 0.0, false, false, 100}, {1, 32, 0.5, true, false, 132}};
  write_epoch_records_csv(path, recs);
  std::ifstream in(path);
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(all == "epoch,trajectory_len,novice_action_fraction,failure_flag,dataset_size\n0,100,0,0,100\n1,32,0.5,1,132\n");
  std::filesystem::remove(path);
}
