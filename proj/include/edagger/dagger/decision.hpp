#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "edagger/common/rng.hpp"
#include "edagger/pendulum/dynamics.hpp"
#include "edagger/uq/ensemble.hpp"

namespace edagger::dagger {

using pendulum::Actor;

/// Expert acts with probability beta_i = lambda^i * beta0.
struct VanillaRule {
  double beta0 = 1.0;
  double lambda = 0.5;
};

/// Novice acts iff |a_nov - a_exp|^2 <= tau.
struct DiscrepancyRule {
  double tau = 0.1;
};

/// Novice acts iff doubt <= chi.
struct DoubtRule {
  double chi = 1e-3;
};

/// Novice acts iff both the discrepancy and doubt conditions hold.
struct EnsembleRule {
  double tau = 0.1;
  double chi = 1e-3;
};

using DecisionRule = std::variant<VanillaRule, DiscrepancyRule, DoubtRule, EnsembleRule>;

/// Throws ConfigError for parameters outside their ranges.
void validate(const DecisionRule& rule);
/// "vanilla", "discrepancy", "doubt" or "ensemble".
std::string kind_name(const DecisionRule& rule);
/// Kind plus parameters, e.g. "doubt(chi=0.001)".
std::string describe(const DecisionRule& rule);

/// Membership test for the deterministic rules. Throws UnsupportedRule for Vanilla.
bool permits(const DecisionRule& rule, double discrepancy_sq, double doubt);

class UnsupportedRule : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Decision {
  std::vector<double> chosen_action;
  Actor actor = Actor::Expert;
  double discrepancy_sq = 0.0;
  double doubt = 0.0;
};

double discrepancy_sq(std::span<const double> novice_mean, std::span<const double> expert_action);

/// Chooses between the novice mean and the expert action at one time step.
/// Only Vanilla consumes randomness (one uniform draw per call).
Decision decide(const DecisionRule& rule, const uq::PredictiveDistribution& novice,
                std::span<const double> expert_action, std::size_t epoch, Rng& rng);

}  // namespace edagger::dagger
