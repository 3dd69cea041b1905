#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>

#include <Eigen/Dense>

namespace edagger::gp {

/// Squared-exponential kernel k(x, x') = signal_variance * exp(-|x - x'|^2 / (2 length_scale^2))
/// plus noise_variance on the diagonal of the training covariance.
struct GpHyperparameters {
  double length_scale = 10.0;
  double signal_variance = 1.0;
  double noise_variance = 1e-10;
};

struct GpFitOptions {
  std::size_t restarts = 9;  // 0 keeps the initial hyperparameters verbatim
  bool optimize_length_scale = false;
  bool optimize_signal_variance = true;
  bool optimize_noise_variance = true;
  std::size_t steps = 200;  // ADAM steps per restart, in log-parameter space
  double learning_rate = 0.05;
  double min_noise_variance = 1e-10;
  std::uint64_t seed = 0;
};

class GpFitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact GP posterior with zero prior mean. Immutable once built.
struct GpModel {
  GpHyperparameters hyper;
  Eigen::MatrixXd train_inputs;   // n x d
  Eigen::VectorXd train_targets;  // n
  Eigen::MatrixXd chol_factor;    // lower triangular, L L^T = K + (noise + jitter) I
  Eigen::VectorXd alpha;          // (K + noise I)^-1 y
  double jitter = 0.0;
  double log_marginal_likelihood = 0.0;
};

double se_kernel(std::span<const double> x, std::span<const double> y, const GpHyperparameters& hyper);

/// Factorizes the training covariance for fixed hyperparameters. Escalates a
/// diagonal jitter from 1e-10 to 1e-6 before giving up with GpFitError.
GpModel gp_build(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, const GpHyperparameters& hyper);

/// Maximizes the log marginal likelihood over the enabled hyperparameters.
/// The first start is `init`; later starts are drawn log-uniformly from the
/// seeded stream. The best-scoring start wins.
GpModel gp_fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets, const GpHyperparameters& init,
               const GpFitOptions& options);

struct GpPrediction {
  double mean;
  double std;
};

GpPrediction gp_posterior(const GpModel& model, std::span<const double> query);

}  // namespace edagger::gp
