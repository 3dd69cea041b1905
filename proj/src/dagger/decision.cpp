#include "edagger/dagger/decision.hpp"

#include <cmath>
#include <stdexcept>

#include "edagger/common/csv.hpp"
#include "edagger/common/errors.hpp"

namespace edagger::dagger {

namespace {

template <class... F>
struct Overloaded : F... {
  using F::operator()...;
};
template <class... F>
Overloaded(F...) -> Overloaded<F...>;

void require_threshold(double value, const char* what) {
  // +inf is a legal "always permit" threshold.
  if (std::isnan(value) || value < 0.0) throw ConfigError(std::string(what) + " must be >= 0");
}

}  // namespace

void validate(const DecisionRule& rule) {
  std::visit(Overloaded{
                 [](const VanillaRule& r) {
                   if (!(r.beta0 >= 0.0 && r.beta0 <= 1.0)) throw ConfigError("beta0 must lie in [0, 1]");
                   if (!(r.lambda > 0.0 && r.lambda < 1.0)) throw ConfigError("lambda must lie in (0, 1)");
                 },
                 [](const DiscrepancyRule& r) { require_threshold(r.tau, "tau"); },
                 [](const DoubtRule& r) { require_threshold(r.chi, "chi"); },
                 [](const EnsembleRule& r) {
                   require_threshold(r.tau, "tau");
                   require_threshold(r.chi, "chi");
                 },
             },
             rule);
}

std::string kind_name(const DecisionRule& rule) {
  static constexpr const char* kNames[] = {"vanilla", "discrepancy", "doubt", "ensemble"};
  return kNames[rule.index()];
}

std::string describe(const DecisionRule& rule) {
  return std::visit(Overloaded{
                        [](const VanillaRule& r) {
                          return "vanilla(beta0=" + format_double(r.beta0) + ",lambda=" + format_double(r.lambda) +
                                 ")";
                        },
                        [](const DiscrepancyRule& r) { return "discrepancy(tau=" + format_double(r.tau) + ")"; },
                        [](const DoubtRule& r) { return "doubt(chi=" + format_double(r.chi) + ")"; },
                        [](const EnsembleRule& r) {
                          return "ensemble(tau=" + format_double(r.tau) + ",chi=" + format_double(r.chi) + ")";
                        },
                    },
                    rule);
}

bool permits(const DecisionRule& rule, double disc_sq, double doubt) {
  return std::visit(Overloaded{
                        [](const VanillaRule&) -> bool {
                          throw UnsupportedRule("vanilla rule membership is stochastic");
                        },
                        [&](const DiscrepancyRule& r) { return disc_sq <= r.tau; },
                        [&](const DoubtRule& r) { return doubt <= r.chi; },
                        [&](const EnsembleRule& r) { return disc_sq <= r.tau && doubt <= r.chi; },
                    },
                    rule);
}

double discrepancy_sq(std::span<const double> novice_mean, std::span<const double> expert_action) {
  if (novice_mean.size() != expert_action.size()) throw ShapeError("discrepancy: action dimensions differ");
  double total = 0.0;
  for (std::size_t i = 0; i < novice_mean.size(); ++i) {
    const double d = novice_mean[i] - expert_action[i];
    total += d * d;
  }
  return total;
}

Decision decide(const DecisionRule& rule, const uq::PredictiveDistribution& novice,
                std::span<const double> expert_action, std::size_t epoch, Rng& rng) {
  if (novice.variance.size() != novice.mean.size()) throw ShapeError("decide: mean and variance differ in size");
  Decision d;
  d.discrepancy_sq = discrepancy_sq(novice.mean, expert_action);
  d.doubt = uq::doubt_of(novice).value;

  bool novice_acts;
  if (const auto* vanilla = std::get_if<VanillaRule>(&rule)) {
    const double beta = std::pow(vanilla->lambda, static_cast<double>(epoch)) * vanilla->beta0;
    novice_acts = !(rng.uniform01() <= beta);
  } else {
    novice_acts = permits(rule, d.discrepancy_sq, d.doubt);
  }
  d.actor = novice_acts ? Actor::Novice : Actor::Expert;
  if (novice_acts) {
    d.chosen_action = novice.mean;
  } else {
    d.chosen_action.assign(expert_action.begin(), expert_action.end());
  }
  return d;
}

}  // namespace edagger::dagger
