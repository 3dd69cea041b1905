#include <algorithm>

#include "edagger/nn/float_net.hpp"
#include "edagger/simd/kernels.hpp"

namespace edagger::nn {

FloatNet::FloatNet(const DenseNet& net)
    : widths_(net.widths().begin(), net.widths().end()), activation_(net.hidden_activation()) {
  const auto params = net.parameters();
  for (const LayerShape& layer : net.layers()) {
    const std::size_t count = layer.inputs * layer.outputs;
    weights_.emplace_back(params.begin() + layer.weight_offset, params.begin() + layer.weight_offset + count);
    biases_.emplace_back(params.begin() + layer.bias_offset, params.begin() + layer.bias_offset + layer.outputs);
  }
}

void FloatNet::forward_into(const float* inputs, std::size_t rows, std::vector<float>& out, Workspace& ws) const {
  const simd::KernelTable& k = simd::active_kernels();
  const float* x = inputs;
  const std::size_t layers = weights_.size();
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = widths_[l];
    const std::size_t width = widths_[l + 1];
    std::vector<float>& y = l + 1 == layers ? out : (l % 2 == 0 ? ws.ping : ws.pong);
    y.resize(rows * width);
    k.gemm_nn_f32(rows, width, in, x, weights_[l].data(), y.data());
    const std::vector<float>& b = biases_[l];
    for (std::size_t r = 0; r < rows; ++r) {
      float* row = y.data() + r * width;
      for (std::size_t j = 0; j < width; ++j) row[j] += b[j];
    }
    if (l + 1 < layers) {
      switch (activation_) {
        case Activation::Tanh: k.tanh_f32(y.data(), y.data(), y.size()); break;
        case Activation::Relu:
          for (float& v : y) v = std::max(v, 0.0f);
          break;
        case Activation::Identity: break;
      }
    }
    x = y.data();
  }
}

}  // namespace edagger::nn
