#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "edagger/common/rng.hpp"
#include "edagger/nn/dense_net.hpp"
#include "edagger/nn/matrix.hpp"
#include "edagger/nn/train.hpp"

namespace testsupport {

using edagger::Rng;
using edagger::nn::Activation;
using edagger::nn::DenseNet;
using edagger::nn::DropoutMask;
using edagger::nn::Matrix;
using edagger::nn::OutputHead;

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

inline void randomize(DenseNet& net, Rng& rng, double scale = 0.8) {
  for (double& p : net.parameters()) p = rng.uniform(-scale, scale);
}

/// Plain loop forward with no kernels involved; pre-activations are recorded so
/// callers can spot inputs sitting on a relu kink.
struct HandForward {
  std::vector<double> output;
  double min_abs_preactivation = std::numeric_limits<double>::infinity();
};

inline HandForward hand_forward(const DenseNet& net, const std::vector<double>& input,
                                const DropoutMask* mask = nullptr, std::size_t row = 0) {
  HandForward result;
  std::vector<double> x = input;
  const auto layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    std::vector<double> z(layers[l].outputs);
    for (std::size_t o = 0; o < z.size(); ++o) {
      double acc = net.bias(l, o);
      for (std::size_t i = 0; i < x.size(); ++i) acc += net.weight(l, o, i) * x[i];
      z[o] = acc;
    }
    if (l + 1 < layers.size()) {
      for (std::size_t o = 0; o < z.size(); ++o) {
        result.min_abs_preactivation = std::min(result.min_abs_preactivation, std::abs(z[o]));
        switch (net.hidden_activation()) {
          case Activation::Tanh: z[o] = std::tanh(z[o]); break;
          case Activation::Relu: z[o] = z[o] > 0.0 ? z[o] : 0.0; break;
          case Activation::Identity: break;
        }
        if (mask != nullptr) {
          const Matrix& m = mask->hidden[l];
          z[o] *= m(m.rows() == 1 ? 0 : row, o);
        }
      }
    }
    x = std::move(z);
  }
  result.output = std::move(x);
  return result;
}

inline std::vector<double> row_of(const Matrix& m, std::size_t r) {
  return {m.row(r).begin(), m.row(r).end()};
}

/// Smallest |pre-activation| over a batch.
inline double kink_margin(const DenseNet& net, const Matrix& inputs, const DropoutMask* mask) {
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < inputs.rows(); ++r) {
    margin = std::min(margin, hand_forward(net, row_of(inputs, r), mask, r).min_abs_preactivation);
  }
  return margin;
}

/// Central differences of loss_and_gradient(...).loss over every parameter.
inline std::vector<double> fd_gradient(const DenseNet& net, const Matrix& inputs, const Matrix& targets,
                                       const edagger::nn::TrainConfig& config, const DropoutMask* mask,
                                       double h = 1e-5) {
  DenseNet probe = net;
  std::vector<double> grad(net.parameter_count());
  for (std::size_t p = 0; p < grad.size(); ++p) {
    const double saved = probe.parameters()[p];
    probe.parameters()[p] = saved + h;
    const double up = edagger::nn::loss_and_gradient(probe, inputs, targets, config, mask).loss;
    probe.parameters()[p] = saved - h;
    const double down = edagger::nn::loss_and_gradient(probe, inputs, targets, config, mask).loss;
    probe.parameters()[p] = saved;
    grad[p] = (up - down) / (2.0 * h);
  }
  return grad;
}

/// Relative error with an absolute floor: coordinates whose true value is
/// below the floor are compared on the floor's scale, since FD noise there is
/// dominated by rounding in the loss.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

inline double max_relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, relative_error(a[i], b[i], floor));
  return worst;
}

inline double rms(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(acc / static_cast<double>(a.size()));
}

struct GradientCase {
  DenseNet net;
  Matrix inputs;
  Matrix targets;
  edagger::nn::TrainConfig config;
  std::optional<DropoutMask> mask;
};

/// Random (architecture, batch, loss) with at most `max_params` parameters.
/// Relu cases are redrawn until no pre-activation sits within 1e-3 of the kink.
inline GradientCase random_gradient_case(Rng& rng, std::size_t max_params = 100) {
  using edagger::nn::LossKind;
  for (;;) {
    const std::size_t in = 1 + rng.below(3);
    const std::size_t act = 1 + rng.below(2);
    const bool nll = rng.bernoulli(0.5);
    std::vector<std::size_t> widths = {in};
    const std::size_t hidden_layers = 1 + rng.below(3);
    for (std::size_t l = 0; l < hidden_layers; ++l) widths.push_back(2 + rng.below(5));
    widths.push_back(nll ? 2 * act : act);
    const Activation activation = std::array{Activation::Tanh, Activation::Relu, Activation::Identity}[rng.below(3)];
    DenseNet net(widths, activation, nll ? OutputHead::MeanAndLogVariance : OutputHead::PointEstimate);
    if (net.parameter_count() > max_params) continue;
    randomize(net, rng);

    const std::size_t batch = 1 + rng.below(6);
    GradientCase c{std::move(net), random_matrix(batch, in, rng), random_matrix(batch, act, rng), {}, std::nullopt};
    c.config.loss = nll ? LossKind::GaussianNll : LossKind::Mse;
    c.config.l2_coeff = rng.bernoulli(0.5) ? rng.uniform(0.0, 0.1) : 0.0;
    if (rng.bernoulli(0.3)) {
      const double keep = rng.uniform(0.5, 0.9);
      c.mask = edagger::nn::sample_dropout_mask(c.net, rng.bernoulli(0.5) ? 1 : batch, keep, rng);
    }
    if (activation == Activation::Relu &&
        kink_margin(c.net, c.inputs, c.mask ? &*c.mask : nullptr) < 1e-3) {
      continue;
    }
    return c;
  }
}

inline double gradient_case_error(const GradientCase& c) {
  const DropoutMask* mask = c.mask ? &*c.mask : nullptr;
  const auto analytic = edagger::nn::loss_and_gradient(c.net, c.inputs, c.targets, c.config, mask);
  return max_relative_error(analytic.gradient, fd_gradient(c.net, c.inputs, c.targets, c.config, mask));
}

}  // namespace testsupport
