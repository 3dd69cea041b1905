#pragma once

#include <span>
#include <vector>

#include "edagger/nn/dense_net.hpp"
#include "edagger/nn/train.hpp"

namespace edagger::nn::detail {

/// Reverse-mode gradient of the training loss. Holds the forward trace and
/// scratch matrices so repeated calls during training do not reallocate.
class Backprop {
 public:
  /// Writes the gradient into `gradient` (resized to the parameter count) and
  /// returns the loss. Throws TrainingDivergence on a non-finite loss.
  double run(const DenseNet& net, const Matrix& inputs, const Matrix& targets,
             const TrainConfig& config, const DropoutMask* mask, std::size_t batch_index,
             std::vector<double>& gradient);

 private:
  std::vector<Matrix> hidden_;     // post-activation (and post-mask) outputs
  std::vector<Matrix> unmasked_;   // post-activation, pre-mask (dropout only)
  Matrix output_;
  Matrix delta_;
  Matrix delta_prev_;
};

}  // namespace edagger::nn::detail
