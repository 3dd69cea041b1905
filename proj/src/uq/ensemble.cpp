#include "edagger/uq/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "edagger/common/errors.hpp"
#include "moments.hpp"

namespace edagger::uq {

namespace {

// Rounding can push the mixture variance a hair below zero.
constexpr double kNegativeVarianceTolerance = 1e-12;

double clamp_variance(double v) {
  if (v < 0.0 && v > -kNegativeVarianceTolerance) return 0.0;
  return v;
}

}  // namespace

Doubt doubt_of(const PredictiveDistribution& dist) { return Doubt{doubt_of(dist.variance)}; }

double doubt_of(std::span<const double> variance) {
  if (variance.empty()) return 0.0;
  double total = 0.0;
  for (double v : variance) total += v;
  return total / static_cast<double>(variance.size());
}

EnsemblePolicy::EnsemblePolicy(std::vector<nn::DenseNet> members) : members_(std::move(members)) {
  if (members_.empty()) throw ConfigError("ensemble needs at least one member");
  const nn::DenseNet& first = members_.front();
  for (const nn::DenseNet& m : members_) {
    if (!std::equal(m.widths().begin(), m.widths().end(), first.widths().begin(), first.widths().end()) ||
        m.output_head() != first.output_head() || m.hidden_activation() != first.hidden_activation()) {
      throw ConfigError("ensemble members must share one architecture");
    }
  }
}

EnsemblePolicy EnsemblePolicy::initialized(const std::vector<std::size_t>& widths, nn::Activation activation,
                                           nn::OutputHead head, std::size_t members, std::uint64_t base_seed) {
  std::vector<nn::DenseNet> nets;
  nets.reserve(members);
  for (std::size_t m = 0; m < members; ++m) {
    nets.push_back(nn::DenseNet::glorot_uniform(widths, activation, head, derive_seed(base_seed, {m})));
  }
  return EnsemblePolicy(std::move(nets));
}

void EnsembleEvaluator::predict(const nn::Matrix& obs, nn::Matrix& mean, nn::Matrix& variance) {
  const auto members = policy_->members();
  const std::size_t count = members.size();
  const std::size_t dim = policy_->action_dim();
  const std::size_t rows = obs.rows();
  outputs_.resize(count);
  for (std::size_t m = 0; m < count; ++m) members[m].forward_into(obs, outputs_[m], ws_);

  mean.resize(rows, dim);
  variance.resize(rows, dim);
  const double inv_count = 1.0 / static_cast<double>(count);
  if (policy_->member_kind() == nn::OutputHead::PointEstimate) {
    const double inv_dof = count > 1 ? 1.0 / static_cast<double>(count - 1) : 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t d = 0; d < dim; ++d) {
        const detail::Moments mo =
            detail::shifted_moments(count, [&](std::size_t m) { return outputs_[m](r, d); });
        mean(r, d) = mo.mean;
        variance(r, d) = mo.sum_sq * inv_dof;
      }
    }
  } else {
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t d = 0; d < dim; ++d) {
        double var_sum = 0.0;
        for (std::size_t m = 0; m < count; ++m) {
          const double lv = std::clamp(outputs_[m](r, dim + d), nn::kMinLogVariance, nn::kMaxLogVariance);
          var_sum += std::exp(lv);
        }
        // avg(var_i + mu_i^2) - mu^2, evaluated as avg(var_i) + avg((mu_i - mu)^2).
        const detail::Moments mo =
            detail::shifted_moments(count, [&](std::size_t m) { return outputs_[m](r, d); });
        mean(r, d) = mo.mean;
        variance(r, d) = clamp_variance(var_sum * inv_count + mo.sum_sq * inv_count);
      }
    }
  }
}

PredictiveDistribution ensemble_predict(const EnsemblePolicy& policy, std::span<const double> obs) {
  nn::Matrix in(1, obs.size());
  std::copy(obs.begin(), obs.end(), in.data());
  nn::Matrix mean;
  nn::Matrix variance;
  EnsembleEvaluator(policy).predict(in, mean, variance);
  return {{mean.data(), mean.data() + mean.size()}, {variance.data(), variance.data() + variance.size()}};
}

EnsemblePolicy train_ensemble(EnsemblePolicy policy, const nn::Matrix& inputs, const nn::Matrix& targets,
                              const nn::TrainConfig& config) {
  const auto members = policy.members();
  for (std::size_t m = 0; m < members.size(); ++m) {
    nn::TrainConfig member_config = config;
    member_config.rng_seed = derive_seed(config.rng_seed, {m});
    members[m] = nn::train(std::move(members[m]), inputs, targets, member_config);
  }
  return policy;
}

EnsembleMeanF32::EnsembleMeanF32(const EnsemblePolicy& policy) : action_dim_(policy.action_dim()) {
  members_.reserve(policy.size());
  for (const nn::DenseNet& net : policy.members()) members_.emplace_back(net);
}

void EnsembleMeanF32::predict_mean(const nn::Matrix& obs, nn::Matrix& mean) {
  const std::size_t rows = obs.rows();
  input_.resize(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) input_[i] = static_cast<float>(obs.data()[i]);
  mean.resize(rows, action_dim_);
  std::fill(mean.data(), mean.data() + mean.size(), 0.0);
  for (const nn::FloatNet& net : members_) {
    net.forward_into(input_.data(), rows, output_, ws_);
    const std::size_t width = net.output_size();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t d = 0; d < action_dim_; ++d) mean(r, d) += static_cast<double>(output_[r * width + d]);
    }
  }
  const double inv_count = 1.0 / static_cast<double>(members_.size());
  for (std::size_t i = 0; i < mean.size(); ++i) mean.data()[i] *= inv_count;
}

}  // namespace edagger::uq
