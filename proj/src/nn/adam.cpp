#include "edagger/nn/adam.hpp"

#include <cmath>
#include <string>

#include "edagger/common/errors.hpp"
#include "edagger/simd/kernels.hpp"

namespace edagger::nn {

AdamState AdamState::fresh(std::size_t parameter_count, double learning_rate) {
  if (!(learning_rate > 0.0)) throw ConfigError("ADAM learning rate must be positive");
  AdamState state;
  state.first_moment.assign(parameter_count, 0.0);
  state.second_moment.assign(parameter_count, 0.0);
  state.learning_rate = learning_rate;
  return state;
}

void adam_step(std::span<double> parameters, std::span<const double> gradient, AdamState& state) {
  const std::size_t n = parameters.size();
  if (gradient.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
    throw ShapeError("adam_step: " + std::to_string(n) + " parameters, " +
                     std::to_string(gradient.size()) + " gradient entries, " +
                     std::to_string(state.first_moment.size()) + " moment entries");
  }
  ++state.step_count;
  const auto t = static_cast<double>(state.step_count);
  const simd::AdamCoefficients coeffs{
      state.learning_rate,
      state.beta1,
      state.beta2,
      state.epsilon,
      1.0 - std::pow(state.beta1, t),
      1.0 - std::pow(state.beta2, t),
  };
  simd::active_kernels().adam_update(parameters.data(), gradient.data(), state.first_moment.data(),
                                     state.second_moment.data(), n, coeffs);
}

void adam_step(DenseNet& net, std::span<const double> gradient, AdamState& state) {
  adam_step(net.parameters(), gradient, state);
}

}  // namespace edagger::nn
