#include <numeric>
#include <string>

#include "edagger/common/errors.hpp"
#include "edagger/nn/adam.hpp"
#include "edagger/nn/train.hpp"
#include "nn/backprop.hpp"

namespace edagger::nn {

DenseNet train(DenseNet net, const Matrix& inputs, const Matrix& targets, const TrainConfig& config) {
  config.validate();
  if (inputs.rows() == 0) throw ShapeError("train: empty dataset");
  if (targets.rows() != inputs.rows()) throw ShapeError("train: inputs and targets differ in length");
  if (config.epochs == 0) return net;

  const std::size_t n = inputs.rows();
  Rng rng(config.rng_seed);
  AdamState adam = AdamState::fresh(net.parameter_count(), config.learning_rate);
  detail::Backprop backprop;
  std::vector<double> gradient;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Matrix batch_in;
  Matrix batch_out;
  std::size_t batch_index = 0;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t rows = std::min(config.batch_size, n - start);
      batch_in.resize(rows, inputs.cols());
      batch_out.resize(rows, targets.cols());
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t src = order[start + r];
        std::copy_n(inputs.data() + src * inputs.cols(), inputs.cols(), batch_in.data() + r * inputs.cols());
        std::copy_n(targets.data() + src * targets.cols(), targets.cols(), batch_out.data() + r * targets.cols());
      }
      if (config.dropout_keep_prob < 1.0) {
        const DropoutMask mask = sample_dropout_mask(net, rows, config.dropout_keep_prob, rng);
        backprop.run(net, batch_in, batch_out, config, &mask, batch_index, gradient);
      } else {
        backprop.run(net, batch_in, batch_out, config, nullptr, batch_index, gradient);
      }
      adam_step(net, gradient, adam);
      ++batch_index;
    }
  }
  return net;
}

}  // namespace edagger::nn
