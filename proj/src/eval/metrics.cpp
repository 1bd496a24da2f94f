#include "ndv/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ndv/common/error.hpp"

namespace ndv::eval {

double f1_from_pr(double precision, double recall) {
  if (!(precision >= 0.0) || !(recall >= 0.0)) {
    throw DomainError("precision and recall must be non-negative");
  }
  const bool percent = precision > 1.0 || recall > 1.0;
  if (percent && (precision > 100.0 || recall > 100.0)) {
    throw DomainError("percentages must not exceed 100");
  }
  const double scale = percent ? 100.0 : 1.0;
  return scale * harmonic_f1(precision / scale, recall / scale);
}

std::vector<Label> pairwise_classify(std::span<const VectorPair> pairs, double threshold) {
  std::vector<Label> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [a, b] = pairs[i];
    if (a.size() != b.size()) {
      throw DimMismatchError("pair " + std::to_string(i) + " has dims " + std::to_string(a.size()) +
                             " and " + std::to_string(b.size()));
    }
    double dot = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) dot += double(a[d]) * double(b[d]);
    out.push_back(dot >= threshold ? Label::positive : Label::negative);
  }
  return out;
}

PRF pairwise_prf(std::span<const Label> predicted, std::span<const Label> gold) {
  if (predicted.size() != gold.size()) {
    throw ShapeError(std::to_string(predicted.size()) + " predictions for " +
                     std::to_string(gold.size()) + " gold labels");
  }
  std::size_t tp = 0, pred_pos = 0, gold_pos = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool p = predicted[i] == Label::positive;
    const bool g = gold[i] == Label::positive;
    pred_pos += p;
    gold_pos += g;
    tp += p && g;
  }
  return prf_from_counts(tp, pred_pos, gold_pos);
}

double best_threshold(std::span<const double> similarities, std::span<const Label> gold) {
  if (similarities.size() != gold.size() || similarities.empty()) {
    throw ShapeError("best_threshold needs equally sized, nonempty inputs");
  }
  std::vector<std::size_t> order(similarities.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return similarities[a] > similarities[b]; });

  std::size_t gold_pos = 0;
  for (Label l : gold) gold_pos += l == Label::positive;

  // Walk thresholds from high to low; at each distinct value everything at
  // or above it is predicted positive.
  double best = similarities[order.front()];
  double best_f1 = -1.0;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    tp += gold[order[i]] == Label::positive;
    const bool last_of_value =
        i + 1 == order.size() || similarities[order[i + 1]] != similarities[order[i]];
    if (!last_of_value) continue;
    const double f1 = prf_from_counts(tp, i + 1, gold_pos).f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best = similarities[order[i]];
    }
  }
  return best;
}

}  // namespace ndv::eval
