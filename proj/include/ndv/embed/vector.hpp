#pragma once

#include <span>
#include <vector>

namespace ndv::embed {

// Unit-norm check tolerance applied at every store and backend boundary.
inline constexpr double kNormTolerance = 1e-5;

struct EmbeddingVector {
  std::vector<float> values;

  std::size_t dim() const noexcept { return values.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

// v / ||v||, with the norm taken in double precision in index order.
// Throws ZeroVectorError when v has no nonzero (finite) component.
EmbeddingVector l2_normalize(std::span<const double> v);
EmbeddingVector l2_normalize(std::span<const float> v);

double l2_norm(std::span<const float> v) noexcept;

// Sum of a[i]*b[i] accumulated in float32, i ascending. This is the exact
// scoring rule of the flat index.
float inner_product(std::span<const float> a, std::span<const float> b) noexcept;

// a·b / (|a||b|) in double precision.
double cosine(std::span<const float> a, std::span<const float> b) noexcept;

}  // namespace ndv::embed
