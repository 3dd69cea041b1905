#pragma once

#include <cstddef>

namespace edagger::uq::detail {

struct Moments {
  double mean = 0.0;
  double sum_sq = 0.0;  // sum of squared deviations from the mean
};

// Two-pass moments of value(0..n-1), shifted by the first value so that
// identical samples give exactly zero spread.
template <class Value>
Moments shifted_moments(std::size_t n, Value value) {
  const double pivot = value(0);
  double sum = 0.0;
  for (std::size_t i = 1; i < n; ++i) sum += value(i) - pivot;
  const double shift = sum / static_cast<double>(n);
  double ss = shift * shift;  // sample 0 sits at -shift
  for (std::size_t i = 1; i < n; ++i) {
    const double e = (value(i) - pivot) - shift;
    ss += e * e;
  }
  return {pivot + shift, ss};
}

}  // namespace edagger::uq::detail
