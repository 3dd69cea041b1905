#include "nn/backprop.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "edagger/common/errors.hpp"
#include "edagger/simd/kernels.hpp"

namespace edagger::nn {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(l2_coeff >= 0.0)) throw ConfigError("l2_coeff must be >= 0");
  if (!(dropout_keep_prob > 0.0 && dropout_keep_prob <= 1.0)) {
    throw ConfigError("dropout_keep_prob must lie in (0, 1]");
  }
}

namespace detail {

namespace {

// Backward through the hidden activation, expressed in terms of its output.
void activation_backward(Activation activation, const Matrix& out, Matrix& grad) {
  switch (activation) {
    case Activation::Tanh:
      simd::active_kernels().tanh_backward(out.data(), grad.data(), grad.size());
      break;
    case Activation::Relu:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        if (!(out.data()[i] > 0.0)) grad.data()[i] = 0.0;
      }
      break;
    case Activation::Identity:
      break;
  }
}

// Fills delta with dLoss/dOutput (already divided by the batch size) and
// returns the mean data loss.
double output_loss(const DenseNet& net, const Matrix& output, const Matrix& targets, LossKind loss,
                   Matrix& delta) {
  const std::size_t batch = output.rows();
  const std::size_t dim = net.action_dim();
  const double inv_batch = 1.0 / static_cast<double>(batch);
  delta.resize(batch, output.cols());
  double total = 0.0;
  if (loss == LossKind::Mse) {
    if (net.output_head() != OutputHead::PointEstimate) {
      throw ShapeError("MSE loss needs a point-estimate output head");
    }
    const double scale = 2.0 * inv_batch / static_cast<double>(dim);
    for (std::size_t r = 0; r < batch; ++r) {
      double example = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double err = output(r, d) - targets(r, d);
        example += err * err;
        delta(r, d) = scale * err;
      }
      total += example / static_cast<double>(dim);
    }
  } else {
    if (net.output_head() != OutputHead::MeanAndLogVariance) {
      throw ShapeError("Gaussian NLL loss needs a mean/log-variance output head");
    }
    for (std::size_t r = 0; r < batch; ++r) {
      double example = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double mu = output(r, d);
        const double raw = output(r, dim + d);
        const double s = std::clamp(raw, kMinLogVariance, kMaxLogVariance);
        const double var = std::exp(s);
        const double err = targets(r, d) - mu;
        example += 0.5 * s + err * err / (2.0 * var);
        delta(r, d) = -err / var * inv_batch;
        const bool inside = raw > kMinLogVariance && raw < kMaxLogVariance;
        delta(r, dim + d) = inside ? (0.5 - err * err / (2.0 * var)) * inv_batch : 0.0;
      }
      total += example;
    }
  }
  return total * inv_batch;
}

}  // namespace

double Backprop::run(const DenseNet& net, const Matrix& inputs, const Matrix& targets,
                     const TrainConfig& config, const DropoutMask* mask, std::size_t batch_index,
                     std::vector<double>& gradient) {
  const std::size_t batch = inputs.rows();
  if (batch == 0) throw ShapeError("loss_and_gradient: empty batch");
  if (inputs.cols() != net.input_size()) throw ShapeError("loss_and_gradient: input width mismatch");
  if (targets.rows() != batch || targets.cols() != net.action_dim()) {
    throw ShapeError("loss_and_gradient: targets must be " + std::to_string(batch) + "x" +
                     std::to_string(net.action_dim()));
  }
  if (mask != nullptr) check_dropout_mask(net, *mask, batch);

  const auto& k = simd::active_kernels();
  const auto layers = net.layers();
  const std::span<const double> params = net.parameters();
  const std::size_t n_hidden = layers.size() - 1;
  hidden_.resize(n_hidden);
  unmasked_.resize(n_hidden);

  // Forward, keeping every hidden activation.
  const Matrix* current = &inputs;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerShape& shape = layers[l];
    Matrix& next = l < n_hidden ? hidden_[l] : output_;
    next.resize(batch, shape.outputs);
    const double* b = params.data() + shape.bias_offset;
    for (std::size_t r = 0; r < batch; ++r) std::copy(b, b + shape.outputs, next.data() + r * shape.outputs);
    k.gemm_nn(batch, shape.outputs, shape.inputs, current->data(), params.data() + shape.weight_offset,
              next.data(), true);
    if (l < n_hidden) {
      detail::apply_activation(net.hidden_activation(), next);
      if (mask != nullptr) {
        unmasked_[l] = next;
        detail::apply_mask(next, mask->hidden[l]);
      }
    }
    current = &next;
  }

  double loss = output_loss(net, output_, targets, config.loss, delta_);

  gradient.assign(net.parameter_count(), 0.0);
  for (std::size_t l = layers.size(); l-- > 0;) {
    const LayerShape& shape = layers[l];
    const Matrix& layer_input = l == 0 ? inputs : hidden_[l - 1];
    k.gemm_tn_acc(shape.inputs, shape.outputs, batch, layer_input.data(), delta_.data(),
                  gradient.data() + shape.weight_offset);
    double* db = gradient.data() + shape.bias_offset;
    for (std::size_t r = 0; r < batch; ++r) {
      const double* row = delta_.data() + r * shape.outputs;
      for (std::size_t o = 0; o < shape.outputs; ++o) db[o] += row[o];
    }
    if (l == 0) break;
    delta_prev_.resize(batch, shape.inputs);
    k.gemm_nt(batch, shape.inputs, shape.outputs, delta_.data(), params.data() + shape.weight_offset,
              delta_prev_.data());
    if (mask != nullptr) {
      detail::apply_mask(delta_prev_, mask->hidden[l - 1]);
      activation_backward(net.hidden_activation(), unmasked_[l - 1], delta_prev_);
    } else {
      activation_backward(net.hidden_activation(), hidden_[l - 1], delta_prev_);
    }
    std::swap(delta_, delta_prev_);
  }

  if (config.l2_coeff > 0.0) {
    loss += config.l2_coeff * net.weight_norm_sq();
    const double two_l2 = 2.0 * config.l2_coeff;
    for (const LayerShape& shape : layers) {
      for (std::size_t i = 0; i < shape.inputs * shape.outputs; ++i) {
        gradient[shape.weight_offset + i] += two_l2 * params[shape.weight_offset + i];
      }
    }
  }
  if (!std::isfinite(loss)) throw TrainingDivergence(batch_index, loss);
  return loss;
}

}  // namespace detail

LossAndGradient loss_and_gradient(const DenseNet& net, const Matrix& inputs, const Matrix& targets,
                                  const TrainConfig& config, const DropoutMask* mask,
                                  std::size_t batch_index) {
  LossAndGradient result;
  detail::Backprop backprop;
  result.loss = backprop.run(net, inputs, targets, config, mask, batch_index, result.gradient);
  return result;
}

}  // namespace edagger::nn
