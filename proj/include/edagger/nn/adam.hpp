#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "edagger/nn/dense_net.hpp"

namespace edagger::nn {

struct AdamState {
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::uint64_t step_count = 0;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Zeroed moments for `parameter_count` parameters.
  static AdamState fresh(std::size_t parameter_count, double learning_rate);
};

/// One bias-corrected ADAM step; increments state.step_count.
void adam_step(std::span<double> parameters, std::span<const double> gradient, AdamState& state);
void adam_step(DenseNet& net, std::span<const double> gradient, AdamState& state);

}  // namespace edagger::nn
