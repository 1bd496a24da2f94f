#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ndv/nermask/types.hpp"

namespace ndv::ner {

// Maximal runs B-X (I-X)* become one span from the first token's start to
// the last token's end. An I-X that does not continue a run of class X is
// treated as B-X. O breaks runs.
// Throws AnnotationError on empty or overlapping/out-of-order tokens.
std::vector<EntitySpan> decode_bio(std::span<const TokenAnnotation> annotations);

// Inverse of decode_bio over a fixed tokenization. Every span must start on
// a token start and end on a token end; AnnotationError otherwise.
std::vector<BioTag> encode_bio(std::span<const std::pair<std::size_t, std::size_t>> tokens,
                               std::span<const EntitySpan> spans);

// Tags with dangling I-X rewritten to B-X: the canonical form that
// encode_bio(decode_bio(...)) reproduces.
std::vector<BioTag> repair_tags(std::span<const BioTag> tags);

// Sorted and pairwise disjoint.
bool is_valid_span_set(std::span<const EntitySpan> spans) noexcept;

struct EntityCounts {
  std::array<std::size_t, 4> by_class{};  // indexed by EntityClass
  std::size_t articles = 0;

  std::size_t operator[](EntityClass c) const noexcept { return by_class[std::size_t(c)]; }
};

// Entities per class over a set of annotated articles.
EntityCounts count_entities(std::span<const std::vector<EntitySpan>> per_article);

}  // namespace ndv::ner
