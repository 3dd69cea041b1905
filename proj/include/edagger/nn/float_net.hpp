#pragma once

#include <cstddef>
#include <vector>

#include "edagger/nn/dense_net.hpp"

namespace edagger::nn {

/// Single-precision copy of a DenseNet for bulk inference. Parameters are
/// rounded to nearest float; no dropout support.
class FloatNet {
 public:
  explicit FloatNet(const DenseNet& net);

  std::size_t input_size() const { return widths_.front(); }
  std::size_t output_size() const { return widths_.back(); }

  struct Workspace {
    std::vector<float> ping;
    std::vector<float> pong;
  };

  /// inputs is rows x input_size, row-major. out is resized to rows x output_size.
  void forward_into(const float* inputs, std::size_t rows, std::vector<float>& out, Workspace& ws) const;

 private:
  std::vector<std::size_t> widths_;
  Activation activation_;
  std::vector<std::vector<float>> weights_;  // [inputs x outputs] per layer
  std::vector<std::vector<float>> biases_;
};

}  // namespace edagger::nn
