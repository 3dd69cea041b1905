#include "edagger/gp/gp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include "edagger/common/errors.hpp"
#include "edagger/common/rng.hpp"
#include "edagger/nn/adam.hpp"

namespace edagger::gp {

namespace {

constexpr std::array<double, 6> kJitterLadder = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
constexpr double kLogMin = -11.512925464970229;  // log(1e-5)
constexpr double kLogMax = 11.512925464970229;   // log(1e5)

double sq_dist(const Eigen::MatrixXd& x, Eigen::Index i, Eigen::Index j) {
  return (x.row(i) - x.row(j)).squaredNorm();
}

Eigen::MatrixXd signal_covariance(const Eigen::MatrixXd& x, const GpHyperparameters& h) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  const double inv = 1.0 / (2.0 * h.length_scale * h.length_scale);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      k(i, j) = k(j, i) = h.signal_variance * std::exp(-sq_dist(x, i, j) * inv);
    }
  }
  return k;
}

struct Factorization {
  Eigen::MatrixXd lower;
  double jitter;
};

std::optional<Factorization> factorize(const Eigen::MatrixXd& k_signal, double noise) {
  for (double jitter : kJitterLadder) {
    Eigen::MatrixXd k = k_signal;
    k.diagonal().array() += noise + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() == Eigen::Success) return Factorization{llt.matrixL(), jitter};
  }
  return std::nullopt;
}

double lml_from(const Eigen::MatrixXd& lower, const Eigen::VectorXd& y, const Eigen::VectorXd& alpha) {
  const double n = static_cast<double>(y.size());
  return -0.5 * y.dot(alpha) - lower.diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

// Solves (L L') x = b.
template <class Rhs>
Eigen::MatrixXd chol_solve(const Eigen::MatrixXd& lower, const Rhs& b) {
  const Eigen::MatrixXd half = lower.triangularView<Eigen::Lower>().solve(b);
  return lower.transpose().triangularView<Eigen::Upper>().solve(half);
}

// Log-parameter vector: [log length_scale, log signal_variance, log noise_variance].
GpHyperparameters from_log(const std::array<double, 3>& p) {
  return {std::exp(p[0]), std::exp(p[1]), std::exp(p[2])};
}

struct Evaluation {
  double lml;
  std::array<double, 3> grad;  // d lml / d log-parameter
};

std::optional<Evaluation> evaluate(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GpHyperparameters& h) {
  const Eigen::MatrixXd k_signal = signal_covariance(x, h);
  const auto fac = factorize(k_signal, h.noise_variance);
  if (!fac) return std::nullopt;
  const Eigen::Index n = x.rows();
  const Eigen::VectorXd alpha = chol_solve(fac->lower, y);
  const Eigen::MatrixXd k_inv = chol_solve(fac->lower, Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd inner = alpha * alpha.transpose() - k_inv;

  Evaluation ev{lml_from(fac->lower, y, alpha), {0.0, 0.0, 0.0}};
  const double inv_l2 = 1.0 / (h.length_scale * h.length_scale);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double kij = k_signal(i, j);
      ev.grad[0] += inner(i, j) * kij * sq_dist(x, i, j) * inv_l2;
      ev.grad[1] += inner(i, j) * kij;
    }
    ev.grad[2] += inner(i, i) * h.noise_variance;
  }
  for (double& g : ev.grad) g *= 0.5;
  return ev;
}

}  // namespace

double se_kernel(std::span<const double> x, std::span<const double> y, const GpHyperparameters& hyper) {
  if (x.size() != y.size()) throw ShapeError("se_kernel: dimension mismatch");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (x[i] - y[i]) * (x[i] - y[i]);
  return hyper.signal_variance * std::exp(-d2 / (2.0 * hyper.length_scale * hyper.length_scale));
}

GpModel gp_build(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, const GpHyperparameters& hyper) {
  if (inputs.rows() == 0) throw ShapeError("gp_build: no training points");
  if (inputs.rows() != targets.size()) throw ShapeError("gp_build: inputs and targets differ in length");
  if (!(hyper.length_scale > 0.0) || !(hyper.signal_variance > 0.0) || !(hyper.noise_variance >= 0.0)) {
    throw ConfigError("gp_build: hyperparameters out of range");
  }
  const auto fac = factorize(signal_covariance(inputs, hyper), hyper.noise_variance);
  if (!fac) throw GpFitError("kernel matrix is not positive definite even with jitter 1e-6");
  GpModel model;
  model.hyper = hyper;
  model.train_inputs = inputs;
  model.train_targets = targets;
  model.chol_factor = fac->lower;
  model.jitter = fac->jitter;
  model.alpha = chol_solve(model.chol_factor, targets);
  model.log_marginal_likelihood = lml_from(model.chol_factor, targets, model.alpha);
  return model;
}

GpModel gp_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, const GpHyperparameters& init,
               const GpFitOptions& options) {
  if (options.restarts == 0) return gp_build(inputs, targets, init);

  const std::array<bool, 3> free = {options.optimize_length_scale, options.optimize_signal_variance,
                                    options.optimize_noise_variance};
  const double log_noise_min = std::log(options.min_noise_variance);
  auto clamp_params = [&](std::array<double, 3>& p) {
    p[0] = std::clamp(p[0], kLogMin, kLogMax);
    p[1] = std::clamp(p[1], kLogMin, kLogMax);
    p[2] = std::clamp(p[2], log_noise_min, kLogMax);
  };

  Rng rng(options.seed);
  std::optional<GpHyperparameters> best;
  double best_lml = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < options.restarts; ++r) {
    std::array<double, 3> p = {std::log(init.length_scale), std::log(init.signal_variance),
                               std::log(std::max(init.noise_variance, options.min_noise_variance))};
    if (r > 0) {
      // log10 ranges for fresh starts: length scale and signal in [1e-2, 1e2],
      // noise in [1e-8, 1e-1].
      if (free[0]) p[0] = rng.uniform(-2.0, 2.0) * std::numbers::ln10;
      if (free[1]) p[1] = rng.uniform(-2.0, 2.0) * std::numbers::ln10;
      if (free[2]) p[2] = rng.uniform(-8.0, -1.0) * std::numbers::ln10;
    }
    clamp_params(p);
    nn::AdamState adam = nn::AdamState::fresh(3, options.learning_rate);
    std::optional<std::array<double, 3>> last_good;
    double last_lml = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s <= options.steps; ++s) {
      const auto ev = evaluate(inputs, targets, from_log(p));
      if (!ev || !std::isfinite(ev->lml)) break;
      last_good = p;
      last_lml = ev->lml;
      if (s == options.steps) break;
      std::array<double, 3> descent{};
      for (int i = 0; i < 3; ++i) descent[i] = free[i] ? -ev->grad[i] : 0.0;
      nn::adam_step(p, descent, adam);
      clamp_params(p);
    }
    if (last_good && last_lml > best_lml) {
      best_lml = last_lml;
      best = from_log(*last_good);
    }
  }
  if (!best) throw GpFitError("every optimizer restart failed to factorize the kernel matrix");
  if (!options.optimize_noise_variance) best->noise_variance = init.noise_variance;
  return gp_build(inputs, targets, *best);
}

GpPrediction gp_posterior(const GpModel& model, std::span<const double> query) {
  const Eigen::Index n = model.train_inputs.rows();
  const Eigen::Index d = model.train_inputs.cols();
  if (static_cast<Eigen::Index>(query.size()) != d) throw ShapeError("gp_posterior: query dimension mismatch");
  Eigen::VectorXd k_star(n);
  std::vector<double> row(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index c = 0; c < d; ++c) row[static_cast<std::size_t>(c)] = model.train_inputs(i, c);
    k_star(i) = se_kernel(row, query, model.hyper);
  }
  const double mean = k_star.dot(model.alpha);
  const Eigen::VectorXd v = model.chol_factor.triangularView<Eigen::Lower>().solve(k_star);
  const double var = model.hyper.signal_variance - v.squaredNorm();
  return {mean, std::sqrt(std::max(var, 0.0))};
}

}  // namespace edagger::gp
