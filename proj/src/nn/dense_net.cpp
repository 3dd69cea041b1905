#include "edagger/nn/dense_net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edagger/common/errors.hpp"
#include "edagger/simd/kernels.hpp"

namespace edagger::nn {

std::string_view to_string(Activation activation) {
  switch (activation) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Identity: return "identity";
  }
  return "unknown";
}

std::string_view to_string(OutputHead head) {
  switch (head) {
    case OutputHead::PointEstimate: return "point";
    case OutputHead::MeanAndLogVariance: return "mean_logvar";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "relu") return Activation::Relu;
  if (name == "identity") return Activation::Identity;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

OutputHead parse_output_head(std::string_view name) {
  if (name == "point") return OutputHead::PointEstimate;
  if (name == "mean_logvar") return OutputHead::MeanAndLogVariance;
  throw ConfigError("unknown output head '" + std::string(name) + "'");
}

DenseNet::DenseNet(std::vector<std::size_t> widths, Activation hidden_activation, OutputHead head)
    : widths_(std::move(widths)), activation_(hidden_activation), head_(head) {
  if (widths_.size() < 2) throw ShapeError("DenseNet needs at least input and output widths");
  for (std::size_t w : widths_) {
    if (w == 0) throw ShapeError("DenseNet layer widths must be positive");
  }
  if (head_ == OutputHead::MeanAndLogVariance && widths_.back() % 2 != 0) {
    throw ShapeError("MeanAndLogVariance head needs an even output width");
  }
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    LayerShape shape{widths_[l], widths_[l + 1], offset, 0};
    offset += shape.inputs * shape.outputs;
    shape.bias_offset = offset;
    offset += shape.outputs;
    layers_.push_back(shape);
  }
  params_.assign(offset, 0.0);
}

DenseNet DenseNet::glorot_uniform(std::vector<std::size_t> widths, Activation hidden_activation,
                                  OutputHead head, std::uint64_t seed) {
  DenseNet net(std::move(widths), hidden_activation, head);
  Rng rng(seed);
  for (const LayerShape& l : net.layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.inputs + l.outputs));
    for (std::size_t i = 0; i < l.inputs * l.outputs; ++i) {
      net.params_[l.weight_offset + i] = rng.uniform(-limit, limit);
    }
  }
  return net;
}

std::size_t DenseNet::action_dim() const {
  return head_ == OutputHead::MeanAndLogVariance ? output_size() / 2 : output_size();
}

std::vector<std::size_t> DenseNet::hidden_widths() const {
  return {widths_.begin() + 1, widths_.end() - 1};
}

double& DenseNet::weight(std::size_t layer, std::size_t out, std::size_t in) {
  const LayerShape& l = layers_.at(layer);
  return params_[l.weight_offset + in * l.outputs + out];
}

double DenseNet::weight(std::size_t layer, std::size_t out, std::size_t in) const {
  const LayerShape& l = layers_.at(layer);
  return params_[l.weight_offset + in * l.outputs + out];
}

double& DenseNet::bias(std::size_t layer, std::size_t out) {
  return params_[layers_.at(layer).bias_offset + out];
}

double DenseNet::bias(std::size_t layer, std::size_t out) const {
  return params_[layers_.at(layer).bias_offset + out];
}

double DenseNet::weight_norm_sq() const {
  double total = 0.0;
  for (const LayerShape& l : layers_) {
    for (std::size_t i = 0; i < l.inputs * l.outputs; ++i) {
      const double w = params_[l.weight_offset + i];
      total += w * w;
    }
  }
  return total;
}

bool DenseNet::operator==(const DenseNet& other) const {
  return widths_ == other.widths_ && activation_ == other.activation_ && head_ == other.head_ &&
         params_ == other.params_;
}

namespace detail {

void apply_activation(Activation activation, Matrix& values) {
  switch (activation) {
    case Activation::Tanh:
      simd::active_kernels().tanh(values.data(), values.data(), values.size());
      break;
    case Activation::Relu:
      for (std::size_t i = 0; i < values.size(); ++i) values.data()[i] = std::max(0.0, values.data()[i]);
      break;
    case Activation::Identity:
      break;
  }
}

void apply_mask(Matrix& values, const Matrix& mask) {
  const std::size_t cols = values.cols();
  if (mask.rows() == 1) {
    for (std::size_t r = 0; r < values.rows(); ++r) {
      double* row = values.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c) row[c] *= mask.data()[c];
    }
  } else {
    for (std::size_t i = 0; i < values.size(); ++i) values.data()[i] *= mask.data()[i];
  }
}

}  // namespace detail

void check_dropout_mask(const DenseNet& net, const DropoutMask& mask, std::size_t batch) {
  const auto hidden = net.hidden_widths();
  if (mask.hidden.size() != hidden.size()) {
    throw ShapeError("dropout mask has " + std::to_string(mask.hidden.size()) +
                     " layers, network has " + std::to_string(hidden.size()) + " hidden layers");
  }
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    const Matrix& m = mask.hidden[l];
    if (m.cols() != hidden[l] || (m.rows() != 1 && m.rows() != batch)) {
      throw ShapeError("dropout mask for hidden layer " + std::to_string(l) + " has shape " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
  }
}

void DenseNet::forward_into(const Matrix& inputs, Matrix& out, ForwardWorkspace& ws,
                            const DropoutMask* mask) const {
  if (inputs.cols() != input_size()) {
    throw ShapeError("forward: input has " + std::to_string(inputs.cols()) + " columns, network expects " +
                     std::to_string(input_size()));
  }
  if (mask != nullptr) check_dropout_mask(*this, *mask, inputs.rows());
  const auto& k = simd::active_kernels();
  const std::size_t batch = inputs.rows();
  const Matrix* current = &inputs;
  Matrix* buffers[2] = {&ws.ping, &ws.pong};
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const LayerShape& shape = layers_[l];
    const bool last = l + 1 == layers_.size();
    Matrix& next = last ? out : *buffers[l % 2];
    next.resize(batch, shape.outputs);
    const double* b = params_.data() + shape.bias_offset;
    for (std::size_t r = 0; r < batch; ++r) std::copy(b, b + shape.outputs, next.data() + r * shape.outputs);
    k.gemm_nn(batch, shape.outputs, shape.inputs, current->data(), params_.data() + shape.weight_offset,
              next.data(), true);
    if (!last) {
      detail::apply_activation(activation_, next);
      if (mask != nullptr) detail::apply_mask(next, mask->hidden[l]);
    }
    current = &next;
  }
}

Matrix DenseNet::forward(const Matrix& inputs, const DropoutMask* mask) const {
  Matrix out;
  ForwardWorkspace ws;
  forward_into(inputs, out, ws, mask);
  return out;
}

std::vector<double> DenseNet::forward(std::span<const double> input, const DropoutMask* mask) const {
  Matrix in(1, input.size());
  std::copy(input.begin(), input.end(), in.data());
  Matrix out = forward(in, mask);
  return {out.data(), out.data() + out.size()};
}

DropoutMask sample_dropout_mask(const DenseNet& net, std::size_t rows, double keep_prob, Rng& rng) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) throw ConfigError("keep_prob must lie in (0, 1]");
  DropoutMask mask;
  const double scale = 1.0 / keep_prob;
  for (std::size_t width : net.hidden_widths()) {
    Matrix m(rows, width);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.bernoulli(keep_prob) ? scale : 0.0;
    mask.hidden.push_back(std::move(m));
  }
  return mask;
}

}  // namespace edagger::nn
