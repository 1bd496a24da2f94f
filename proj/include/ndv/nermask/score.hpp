#pragma once

#include <span>

#include "ndv/common/prf.hpp"
#include "ndv/nermask/types.hpp"

namespace ndv::ner {

// Span-level scoring with exact boundary matching. With `class_agnostic`
// the entity class is ignored when matching.
PRF score_spans(std::span<const EntitySpan> gold, std::span<const EntitySpan> pred,
                bool class_agnostic);

}  // namespace ndv::ner
