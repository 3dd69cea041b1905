#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "edagger/nn/dense_net.hpp"
#include "edagger/nn/matrix.hpp"

namespace edagger::nn {

enum class LossKind { Mse, GaussianNll };

struct TrainConfig {
  std::size_t epochs = 200;  // full passes over the data
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double l2_coeff = 0.0;
  LossKind loss = LossKind::Mse;
  double dropout_keep_prob = 1.0;
  std::uint64_t rng_seed = 0;

  void validate() const;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as DenseNet::parameters()
};

/// Mean per-example loss over the batch plus l2_coeff * sum(w^2) over weights.
///  - Mse: per example, mean over action dims of (mu - y)^2.
///  - GaussianNll: per example, sum over dims of 0.5 * s + (y - mu)^2 / (2 exp(s)),
///    with s the log-variance head clamped to [kMinLogVariance, kMaxLogVariance].
/// Throws TrainingDivergence(batch_index) if the loss is not finite.
LossAndGradient loss_and_gradient(const DenseNet& net, const Matrix& inputs, const Matrix& targets,
                                  const TrainConfig& config, const DropoutMask* mask = nullptr,
                                  std::size_t batch_index = 0);

/// Mini-batch ADAM on (inputs, targets). Each pass reshuffles with the
/// config.rng_seed stream; the final short batch is kept. With
/// dropout_keep_prob < 1 a fresh per-sample mask is drawn for every batch.
DenseNet train(DenseNet net, const Matrix& inputs, const Matrix& targets, const TrainConfig& config);

}  // namespace edagger::nn
