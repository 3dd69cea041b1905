#include <string>

#include "edagger/common/errors.hpp"
#include "edagger/uq/ensemble.hpp"
#include "moments.hpp"

namespace edagger::uq {

PredictiveDistribution mc_dropout_predict(const nn::DenseNet& net, std::span<const double> obs,
                                          std::size_t n_samples, double keep_prob, Rng& rng) {
  if (n_samples < 2) throw ConfigError("mc_dropout_predict needs n_samples >= 2");
  if (net.output_head() != nn::OutputHead::PointEstimate) {
    throw ConfigError("mc_dropout_predict expects a point-estimate network");
  }
  if (obs.size() != net.input_size()) {
    throw ShapeError("mc_dropout_predict: observation has " + std::to_string(obs.size()) + " entries");
  }
  nn::Matrix batch(n_samples, obs.size());
  for (std::size_t s = 0; s < n_samples; ++s) std::copy(obs.begin(), obs.end(), batch.row(s).begin());
  const nn::DropoutMask mask = nn::sample_dropout_mask(net, n_samples, keep_prob, rng);
  const nn::Matrix out = net.forward(batch, &mask);

  const std::size_t dim = net.action_dim();
  PredictiveDistribution dist{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
  for (std::size_t d = 0; d < dim; ++d) {
    const detail::Moments mo = detail::shifted_moments(n_samples, [&](std::size_t s) { return out(s, d); });
    dist.mean[d] = mo.mean;
    dist.variance[d] = mo.sum_sq / static_cast<double>(n_samples - 1);
  }
  return dist;
}

}  // namespace edagger::uq
