#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace edagger {

/// Mixes a base seed with a path of stream identifiers (splitmix64 finalizer).
/// Used to give every (run, rule, repetition, epoch, member) its own stream.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path);

/// Thin wrapper over mt19937_64. Distributions are computed here rather than
/// through <random> distributions so outputs are identical across standard
/// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform01() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace edagger
