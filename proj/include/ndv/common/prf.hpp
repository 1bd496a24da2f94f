#pragma once

#include <cstddef>

namespace ndv {

// Precision / recall / F1 triple, all in [0, 1].
struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  friend bool operator==(const PRF&, const PRF&) = default;
};

// Harmonic mean, 0 when both inputs are 0.
inline double harmonic_f1(double precision, double recall) noexcept {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

// PRF from confusion counts.
//  - nothing predicted and nothing expected: perfect score
//  - an empty side contributes 0 to its ratio
inline PRF prf_from_counts(std::size_t true_positive, std::size_t predicted,
                           std::size_t expected) noexcept {
  if (predicted == 0 && expected == 0) return {1.0, 1.0, 1.0};
  PRF out;
  out.precision = predicted ? double(true_positive) / double(predicted) : 0.0;
  out.recall = expected ? double(true_positive) / double(expected) : 0.0;
  out.f1 = harmonic_f1(out.precision, out.recall);
  return out;
}

}  // namespace ndv
