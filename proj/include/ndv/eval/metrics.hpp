#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ndv/common/prf.hpp"

namespace ndv::eval {

enum class Label : std::uint8_t { negative, positive };

// Harmonic mean of precision and recall, 0 when both are 0. Inputs above 1
// are read as percentages and the result is returned on the same scale.
// Throws DomainError for negative inputs or percentages above 100.
double f1_from_pr(double precision, double recall);

struct VectorPair {
  std::span<const float> a;
  std::span<const float> b;
};

// positive iff a·b >= threshold (inputs are unit-norm, so a·b is the
// cosine). The dot product is taken in double precision.
std::vector<Label> pairwise_classify(std::span<const VectorPair> pairs, double threshold);

// P/R/F1 of the positive class. No positives predicted and none expected
// scores 1/1/1. Throws ShapeError on a length mismatch.
PRF pairwise_prf(std::span<const Label> predicted, std::span<const Label> gold);

// The operating threshold with the best pairwise F1 on labelled
// similarities, searched over the observed values. Ties go to the higher
// threshold. Throws ShapeError on a length mismatch or empty input.
double best_threshold(std::span<const double> similarities, std::span<const Label> gold);

}  // namespace ndv::eval
