#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "edagger/common/rng.hpp"
#include "edagger/nn/dense_net.hpp"
#include "edagger/nn/float_net.hpp"
#include "edagger/nn/train.hpp"

namespace edagger::uq {

/// Per-dimension predictive mean and variance (units of action^2).
struct PredictiveDistribution {
  std::vector<double> mean;
  std::vector<double> variance;
};

/// Scalar summary of predictive variance: the mean over action dimensions.
struct Doubt {
  double value = 0.0;
  auto operator<=>(const Doubt&) const = default;
};

Doubt doubt_of(const PredictiveDistribution& dist);
/// Same scalarization applied to one row of a batched variance matrix.
double doubt_of(std::span<const double> variance);

/// M independently initialized networks sharing one architecture.
class EnsemblePolicy {
 public:
  explicit EnsemblePolicy(std::vector<nn::DenseNet> members);

  /// Member m is Glorot-initialized from derive_seed(base_seed, {m}).
  static EnsemblePolicy initialized(const std::vector<std::size_t>& widths, nn::Activation activation,
                                    nn::OutputHead head, std::size_t members, std::uint64_t base_seed);

  std::span<const nn::DenseNet> members() const { return members_; }
  std::span<nn::DenseNet> members() { return members_; }
  std::size_t size() const { return members_.size(); }
  nn::OutputHead member_kind() const { return members_.front().output_head(); }
  std::size_t input_size() const { return members_.front().input_size(); }
  std::size_t action_dim() const { return members_.front().action_dim(); }

  bool operator==(const EnsemblePolicy&) const = default;

 private:
  std::vector<nn::DenseNet> members_;
};

/// Point members: sample mean and unbiased (M-1) sample variance.
/// Mean/log-variance members: moments of the equal-weight Gaussian mixture.
PredictiveDistribution ensemble_predict(const EnsemblePolicy& policy, std::span<const double> obs);

/// Batched ensemble_predict with reusable buffers. One instance per thread.
class EnsembleEvaluator {
 public:
  explicit EnsembleEvaluator(const EnsemblePolicy& policy) : policy_(&policy) {}

  /// mean and variance are resized to obs.rows() x action_dim.
  void predict(const nn::Matrix& obs, nn::Matrix& mean, nn::Matrix& variance);

 private:
  const EnsemblePolicy* policy_;
  nn::ForwardWorkspace ws_;
  std::vector<nn::Matrix> outputs_;
};

/// Ensemble mean action with every member evaluated in single precision.
/// Member outputs are summed in double, in member order.
class EnsembleMeanF32 {
 public:
  explicit EnsembleMeanF32(const EnsemblePolicy& policy);

  /// mean is resized to obs.rows() x action_dim.
  void predict_mean(const nn::Matrix& obs, nn::Matrix& mean);

 private:
  std::vector<nn::FloatNet> members_;
  std::size_t action_dim_;
  nn::FloatNet::Workspace ws_;
  std::vector<float> input_;
  std::vector<float> output_;
};

/// n_samples stochastic passes of `net` with fresh dropout masks.
PredictiveDistribution mc_dropout_predict(const nn::DenseNet& net, std::span<const double> obs,
                                          std::size_t n_samples, double keep_prob, Rng& rng);

/// Trains every member on the full dataset (no bootstrap). Member m shuffles
/// with derive_seed(config.rng_seed, {m}); members are independent of each
/// other and of scheduling.
EnsemblePolicy train_ensemble(EnsemblePolicy policy, const nn::Matrix& inputs, const nn::Matrix& targets,
                              const nn::TrainConfig& config);

/// Versioned JSON parameter file. Round trips are bit-exact.
void save_policy(const EnsemblePolicy& policy, const std::filesystem::path& path);
EnsemblePolicy load_policy(const std::filesystem::path& path);
std::string policy_to_json(const EnsemblePolicy& policy);
EnsemblePolicy policy_from_json(const std::string& text);

}  // namespace edagger::uq
