#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "edagger/common/rng.hpp"
#include "edagger/nn/matrix.hpp"

namespace edagger::nn {

enum class Activation { Tanh, Relu, Identity };

/// PointEstimate emits the action directly. MeanAndLogVariance emits
/// [mean..., log-variance...] and so has an even output width.
enum class OutputHead { PointEstimate, MeanAndLogVariance };

std::string_view to_string(Activation activation);
std::string_view to_string(OutputHead head);
Activation parse_activation(std::string_view name);
OutputHead parse_output_head(std::string_view name);

/// Log-variance outputs are clamped to this range before exponentiation.
inline constexpr double kMinLogVariance = -10.0;
inline constexpr double kMaxLogVariance = 10.0;

struct LayerShape {
  std::size_t inputs;
  std::size_t outputs;
  std::size_t weight_offset;  // weights stored input-major: [inputs x outputs]
  std::size_t bias_offset;
};

/// Multiplicative masks for hidden activations, one matrix per hidden layer.
/// Entries are 0 or 1/keep_prob (inverted dropout). A mask matrix has either a
/// single row, shared by every sample, or one row per sample.
struct DropoutMask {
  std::vector<Matrix> hidden;
};

/// Scratch buffers reused across forward calls.
struct ForwardWorkspace {
  Matrix ping;
  Matrix pong;
};

/// Fully connected network: hidden layers share one activation, the output
/// layer is linear. Parameters live in one flat vector so optimizers and
/// gradient checks can treat them uniformly.
class DenseNet {
 public:
  /// widths = {input, hidden..., output}. Parameters start at zero.
  DenseNet(std::vector<std::size_t> widths, Activation hidden_activation, OutputHead head);

  /// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
  static DenseNet glorot_uniform(std::vector<std::size_t> widths, Activation hidden_activation,
                                 OutputHead head, std::uint64_t seed);

  std::size_t input_size() const { return widths_.front(); }
  std::size_t output_size() const { return widths_.back(); }
  /// Width of the action (half the output width for MeanAndLogVariance).
  std::size_t action_dim() const;
  std::span<const std::size_t> widths() const { return widths_; }
  std::vector<std::size_t> hidden_widths() const;
  Activation hidden_activation() const { return activation_; }
  OutputHead output_head() const { return head_; }

  std::span<const LayerShape> layers() const { return layers_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }

  /// W[o][i] of layer l (logical out x in indexing).
  double& weight(std::size_t layer, std::size_t out, std::size_t in);
  double weight(std::size_t layer, std::size_t out, std::size_t in) const;
  double& bias(std::size_t layer, std::size_t out);
  double bias(std::size_t layer, std::size_t out) const;

  /// Sum of squared weights (biases excluded).
  double weight_norm_sq() const;

  std::vector<double> forward(std::span<const double> input, const DropoutMask* mask = nullptr) const;
  Matrix forward(const Matrix& inputs, const DropoutMask* mask = nullptr) const;
  /// Batched forward into `out`, reusing `ws`.
  void forward_into(const Matrix& inputs, Matrix& out, ForwardWorkspace& ws,
                    const DropoutMask* mask = nullptr) const;

  bool operator==(const DenseNet& other) const;

 private:
  std::vector<std::size_t> widths_;
  Activation activation_;
  OutputHead head_;
  std::vector<LayerShape> layers_;
  std::vector<double> params_;
};

/// Fresh Bernoulli(keep_prob) masks scaled by 1/keep_prob for every hidden unit.
DropoutMask sample_dropout_mask(const DenseNet& net, std::size_t rows, double keep_prob, Rng& rng);

/// Throws ShapeError unless `mask` matches the hidden widths of `net` and has
/// either 1 or `batch` rows per layer.
void check_dropout_mask(const DenseNet& net, const DropoutMask& mask, std::size_t batch);

namespace detail {
void apply_activation(Activation activation, Matrix& values);
void apply_mask(Matrix& values, const Matrix& mask);
}  // namespace detail

}  // namespace edagger::nn
