#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "edagger/common/errors.hpp"
#include "edagger/uq/ensemble.hpp"
#include "support.hpp"

using namespace edagger;
using namespace edagger::uq;
using nn::Activation;
using nn::DenseNet;
using nn::OutputHead;

namespace {

// Single linear layer that outputs `value` for any input.
DenseNet constant_net(double value, std::size_t in = 1) {
  DenseNet net({in, 1}, Activation::Tanh, OutputHead::PointEstimate);
  net.bias(0, 0) = value;
  return net;
}

DenseNet gaussian_net(double mu, double log_var) {
  DenseNet net({1, 2}, Activation::Tanh, OutputHead::MeanAndLogVariance);
  net.bias(0, 0) = mu;
  net.bias(0, 1) = log_var;
  return net;
}

struct Data {
  nn::Matrix x;
  nn::Matrix y;
};

Data line_2x(std::size_t n, double lo, double hi) {
  Data d{nn::Matrix(n, 1), nn::Matrix(n, 1)};
  for (std::size_t i = 0; i < n; ++i) {
    d.x(i, 0) = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    d.y(i, 0) = 2.0 * d.x(i, 0);
  }
  return d;
}

double doubt_at(const EnsemblePolicy& p, double x) {
  return doubt_of(ensemble_predict(p, std::vector<double>{x})).value;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("ensemble_predict: identical members have zero variance") {
  const EnsemblePolicy p({constant_net(0.3), constant_net(0.3), constant_net(0.3)});
  const auto d = ensemble_predict(p, std::vector<double>{1.0});
  CHECK(d.mean[0] == doctest::Approx(0.3));
  CHECK(d.variance[0] == 0.0);
}

TEST_CASE("ensemble_predict: unbiased sample variance") {
  const EnsemblePolicy p({constant_net(0.0), constant_net(2.0)});
  const auto d = ensemble_predict(p, std::vector<double>{0.0});
  CHECK(d.mean[0] == 1.0);
  CHECK(d.variance[0] == 2.0);
}

TEST_CASE("ensemble_predict: Gaussian mixture moments") {
  const EnsemblePolicy same({gaussian_net(0.0, 0.0), gaussian_net(0.0, 0.0)});
  const auto a = ensemble_predict(same, std::vector<double>{0.5});
  CHECK(a.mean[0] == 0.0);
  CHECK(a.variance[0] == doctest::Approx(1.0));

  // avg(var_i + mu_i^2) - mean^2 with mu = {1, 3}, var = {e^0, e^1}
  const EnsemblePolicy mixed({gaussian_net(1.0, 0.0), gaussian_net(3.0, 1.0)});
  const auto b = ensemble_predict(mixed, std::vector<double>{0.0});
  const double expected = 0.5 * ((1.0 + 1.0) + (std::exp(1.0) + 9.0)) - 4.0;
  CHECK(b.mean[0] == doctest::Approx(2.0));
  CHECK(b.variance[0] == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("ensemble_predict: mean is invariant to member order") {
  std::vector<DenseNet> nets;
  for (std::uint64_t s = 0; s < 5; ++s) {
    nets.push_back(DenseNet::glorot_uniform({2, 8, 1}, Activation::Tanh, OutputHead::PointEstimate, s));
  }
  const EnsemblePolicy forward(nets);
  std::reverse(nets.begin(), nets.end());
  std::swap(nets[0], nets[2]);
  const EnsemblePolicy shuffled(nets);
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    const std::vector<double> obs = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const auto a = ensemble_predict(forward, obs);
    const auto b = ensemble_predict(shuffled, obs);
    CHECK(a.mean[0] == doctest::Approx(b.mean[0]).epsilon(1e-14));
    CHECK(a.variance[0] == doctest::Approx(b.variance[0]).epsilon(1e-12));
  }
}

TEST_CASE("ensemble_predict: batched evaluator agrees with per-observation calls") {
  const EnsemblePolicy p =
      EnsemblePolicy::initialized({2, 16, 16, 2}, Activation::Tanh, OutputHead::MeanAndLogVariance, 4, 9);
  Rng rng(4);
  const nn::Matrix obs = testsupport::random_matrix(30, 2, rng, -3.0, 3.0);
  EnsembleEvaluator eval(p);
  nn::Matrix mean, var;
  eval.predict(obs, mean, var);
  for (std::size_t r = 0; r < obs.rows(); ++r) {
    const auto d = ensemble_predict(p, testsupport::row_of(obs, r));
    CHECK(mean(r, 0) == doctest::Approx(d.mean[0]).epsilon(1e-13));
    CHECK(var(r, 0) == doctest::Approx(d.variance[0]).epsilon(1e-12));
    CHECK(var(r, 0) >= 0.0);
  }
}

TEST_CASE("EnsembleMeanF32 tracks the double-precision mean") {
  const EnsemblePolicy p = EnsemblePolicy::initialized({2, 64, 64, 32, 32, 1}, Activation::Tanh,
                                                       OutputHead::PointEstimate, 10, 21);
  Rng rng(6);
  const nn::Matrix obs = testsupport::random_matrix(200, 2, rng, -3.0, 3.0);
  EnsembleEvaluator eval(p);
  EnsembleMeanF32 fast(p);
  nn::Matrix mean, var, mean32;
  eval.predict(obs, mean, var);
  fast.predict_mean(obs, mean32);
  for (std::size_t r = 0; r < obs.rows(); ++r) CHECK(std::abs(mean32(r, 0) - mean(r, 0)) < 1e-5);
}

TEST_CASE("ensemble construction errors") {
  CHECK_THROWS_AS(EnsemblePolicy({}), ConfigError);
  CHECK_THROWS_AS(EnsemblePolicy({constant_net(0.0, 1), constant_net(0.0, 2)}), ConfigError);
}

TEST_CASE("initialized members differ") {
  const EnsemblePolicy p = EnsemblePolicy::initialized({2, 8, 1}, Activation::Tanh, OutputHead::PointEstimate, 4, 1);
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = a + 1; b < 4; ++b) CHECK_FALSE(p.members()[a] == p.members()[b]);
}

TEST_CASE("doubt_of scalarization") {
  CHECK(doubt_of(PredictiveDistribution{{0.0}, {0.0}}).value == 0.0);
  CHECK(doubt_of(PredictiveDistribution{{0.0, 0.0}, {2.0, 4.0}}).value == 3.0);
  const std::vector<double> v = {0.5, 1.25, 3.0};
  for (double k : {0.0, 0.5, 2.0, 10.0}) {
    std::vector<double> scaled = v;
    for (double& x : scaled) x *= k;
    CHECK(doubt_of(scaled) == doctest::Approx(k * doubt_of(v)));
  }
}

TEST_CASE("mc_dropout_predict: keep 1 collapses the spread") {
  const DenseNet net = DenseNet::glorot_uniform({1, 16, 16, 1}, Activation::Relu, OutputHead::PointEstimate, 2);
  Rng rng(1);
  const auto d = mc_dropout_predict(net, std::vector<double>{0.4}, 50, 1.0, rng);
  CHECK(d.variance[0] == 0.0);
  CHECK(d.mean[0] == doctest::Approx(net.forward(std::vector<double>{0.4})[0]));
}

TEST_CASE("mc_dropout_predict: seeded and validated") {
  const DenseNet net = DenseNet::glorot_uniform({1, 16, 1}, Activation::Relu, OutputHead::PointEstimate, 2);
  Rng a(5), b(5);
  const auto da = mc_dropout_predict(net, std::vector<double>{0.1}, 100, 0.75, a);
  const auto db = mc_dropout_predict(net, std::vector<double>{0.1}, 100, 0.75, b);
  CHECK(da.mean == db.mean);
  CHECK(da.variance == db.variance);
  Rng c(5);
  CHECK_THROWS_AS(mc_dropout_predict(net, std::vector<double>{0.1}, 1, 0.75, c), ConfigError);
}

TEST_CASE("mc_dropout_predict: variance matches exhaustive mask enumeration") {
  // 2 hidden layers of 5 and 6 units: 2^11 masks
  const double keep = 0.75;
  DenseNet net = DenseNet::glorot_uniform({1, 5, 6, 1}, Activation::Tanh, OutputHead::PointEstimate, 13);
  for (std::size_t l = 0; l < 3; ++l)
    for (std::size_t o = 0; o < net.layers()[l].outputs; ++o) net.bias(l, o) = 0.1 * static_cast<double>(o + l);
  const std::vector<double> obs = {0.8};
  const std::size_t h0 = 5, h1 = 6, bits = h0 + h1;
  double mean = 0.0, second = 0.0;
  for (std::size_t code = 0; code < (std::size_t{1} << bits); ++code) {
    nn::DropoutMask mask;
    mask.hidden = {nn::Matrix(1, h0), nn::Matrix(1, h1)};
    double prob = 1.0;
    for (std::size_t b = 0; b < bits; ++b) {
      const bool on = (code >> b) & 1U;
      prob *= on ? keep : 1.0 - keep;
      nn::Matrix& m = b < h0 ? mask.hidden[0] : mask.hidden[1];
      m(0, b < h0 ? b : b - h0) = on ? 1.0 / keep : 0.0;
    }
    const double y = testsupport::hand_forward(net, obs, &mask).output[0];
    mean += prob * y;
    second += prob * y * y;
  }
  const double exact = second - mean * mean;
  REQUIRE(exact > 1e-4);
  Rng rng(2718);
  const auto d = mc_dropout_predict(net, obs, 10000, keep, rng);
  CHECK(d.variance[0] == doctest::Approx(exact).epsilon(0.05));
  CHECK(d.mean[0] == doctest::Approx(mean).epsilon(0.02));
}

TEST_CASE("train_ensemble: fits y = 2x and is less sure away from data") {
  const Data d = line_2x(20, -1.0, 1.0);
  nn::TrainConfig cfg;
  cfg.epochs = 300;
  cfg.batch_size = 4;
  cfg.learning_rate = 1e-2;
  cfg.rng_seed = 7;
  const EnsemblePolicy init = EnsemblePolicy::initialized({1, 16, 16, 1}, Activation::Tanh, OutputHead::PointEstimate, 5, 3);
  const EnsemblePolicy p = train_ensemble(init, d.x, d.y, cfg);
  for (double x : {-1.0, 0.0, 0.4210526315789473}) {
    CHECK(std::abs(ensemble_predict(p, std::vector<double>{x}).mean[0] - 2.0 * x) < 0.05);
  }
  // 3 input-lengths outside [-1, 1]
  CHECK(doubt_at(p, 0.0) < doubt_at(p, 7.0));
  CHECK(doubt_at(p, 0.0) < doubt_at(p, -7.0));
}

TEST_CASE("train_ensemble: member training is independent of ensemble composition") {
  const Data d = line_2x(12, -1.0, 1.0);
  nn::TrainConfig cfg;
  cfg.epochs = 10;
  cfg.rng_seed = 9;
  const EnsemblePolicy init = EnsemblePolicy::initialized({1, 8, 1}, Activation::Tanh, OutputHead::PointEstimate, 3, 1);
  const EnsemblePolicy all = train_ensemble(init, d.x, d.y, cfg);
  CHECK(train_ensemble(init, d.x, d.y, cfg) == all);
  // member 0 alone trains with the same stream as member 0 of the full ensemble
  const EnsemblePolicy first = train_ensemble(EnsemblePolicy({init.members()[0], init.members()[0]}), d.x, d.y, cfg);
  CHECK(first.members()[0] == all.members()[0]);
}

TEST_CASE("identical members trained on one stream have zero doubt") {
  const Data d = line_2x(10, -1.0, 1.0);
  const DenseNet net = DenseNet::glorot_uniform({1, 8, 1}, Activation::Tanh, OutputHead::PointEstimate, 4);
  nn::TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 4;
  const DenseNet fit = nn::train(net, d.x, d.y, cfg);
  const EnsemblePolicy p({fit, fit, fit});
  for (double x : {-3.0, 0.0, 0.5, 5.0}) CHECK(doubt_at(p, x) == 0.0);
}

TEST_CASE("train_ensemble: shared initialization leaves far less spread than distinct ones") {
  // Full batch, so members differ only through summation order of their
  // shuffles; Adam's normalized first steps amplify that to roughly lr^2.
  const Data d = line_2x(10, -1.0, 1.0);
  const DenseNet net = DenseNet::glorot_uniform({1, 8, 1}, Activation::Tanh, OutputHead::PointEstimate, 4);
  nn::TrainConfig cfg;
  cfg.epochs = 20;
  cfg.batch_size = 10;
  const EnsemblePolicy same = train_ensemble(EnsemblePolicy({net, net, net}), d.x, d.y, cfg);
  const EnsemblePolicy diverse = train_ensemble(
      EnsemblePolicy::initialized({1, 8, 1}, Activation::Tanh, OutputHead::PointEstimate, 3, 4), d.x, d.y, cfg);
  for (double x : {-3.0, 5.0}) {
    CAPTURE(x);
    CHECK(doubt_at(same, x) < 1e-5);
    CHECK(doubt_at(same, x) < 0.01 * doubt_at(diverse, x));
  }
}

TEST_CASE("familiarity: median doubt far from data exceeds median doubt inside") {
  Rng rng(31);
  nn::Matrix x(60, 2), y(60, 1);
  for (std::size_t i = 0; i < 60; ++i) {
    x(i, 0) = rng.uniform(-1, 1);
    x(i, 1) = rng.uniform(-1, 1);
    y(i, 0) = std::sin(x(i, 0)) + 0.5 * x(i, 1);
  }
  nn::TrainConfig cfg;
  cfg.epochs = 100;
  cfg.rng_seed = 2;
  const EnsemblePolicy p = train_ensemble(
      EnsemblePolicy::initialized({2, 32, 32, 1}, Activation::Tanh, OutputHead::PointEstimate, 5, 8), x, y, cfg);
  std::vector<double> inside, outside;
  for (int i = -4; i <= 4; ++i) {
    for (int j = -4; j <= 4; ++j) {
      const double a = 0.8 * i / 4.0, b = 0.8 * j / 4.0;
      inside.push_back(doubt_of(ensemble_predict(p, std::vector<double>{a, b})).value);
      outside.push_back(doubt_of(ensemble_predict(p, std::vector<double>{4.0 + a, -4.0 + b})).value);
    }
  }
  CHECK(median(outside) > median(inside));
}

TEST_CASE("policy serialization round trips bit for bit") {
  const EnsemblePolicy p =
      EnsemblePolicy::initialized({2, 7, 3, 2}, Activation::Relu, OutputHead::MeanAndLogVariance, 3, 77);
  CHECK(policy_from_json(policy_to_json(p)) == p);
  const auto path = std::filesystem::temp_directory_path() / "edagger_policy_roundtrip.json";
  save_policy(p, path);
  CHECK(load_policy(path) == p);
  std::filesystem::remove(path);

  CHECK_THROWS_AS(policy_from_json("{not json"), ConfigError);
  CHECK_THROWS_AS(policy_from_json(R"({"format": "something else"})"), ConfigError);
}
