#include "ndv/embed/vector.hpp"

#include <cmath>

#include "ndv/common/error.hpp"

namespace ndv::embed {

namespace {

template <typename T>
EmbeddingVector normalize_impl(std::span<const T> v) {
  double sum = 0.0;
  for (T x : v) sum += double(x) * double(x);
  const double norm = std::sqrt(sum);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ZeroVectorError("cannot normalize a vector of dim " + std::to_string(v.size()) +
                          " with norm " + std::to_string(norm));
  }
  EmbeddingVector out;
  out.values.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out.values[i] = float(double(v[i]) / norm);
  return out;
}

}  // namespace

EmbeddingVector l2_normalize(std::span<const double> v) { return normalize_impl(v); }
EmbeddingVector l2_normalize(std::span<const float> v) { return normalize_impl(v); }

double l2_norm(std::span<const float> v) noexcept {
  double sum = 0.0;
  for (float x : v) sum += double(x) * double(x);
  return std::sqrt(sum);
}

float inner_product(std::span<const float> a, std::span<const float> b) noexcept {
  float acc = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double cosine(std::span<const float> a, std::span<const float> b) noexcept {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += double(a[i]) * double(b[i]);
  const double denom = l2_norm(a) * l2_norm(b);
  return denom > 0.0 ? dot / denom : 0.0;
}

}  // namespace ndv::embed
