#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edagger {

/// Tensor or vector dimensions that do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A configuration value outside its documented range.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Loss became NaN/inf during optimization.
class TrainingDivergence : public std::runtime_error {
 public:
  TrainingDivergence(std::size_t batch_index, double loss)
      : std::runtime_error("training diverged at batch " + std::to_string(batch_index) +
                           " (loss=" + std::to_string(loss) + ")"),
        batch_index_(batch_index) {}

  std::size_t batch_index() const noexcept { return batch_index_; }

 private:
  std::size_t batch_index_;
};

/// Integrator produced a non-finite state.
class SimulationBlowUp : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace edagger
