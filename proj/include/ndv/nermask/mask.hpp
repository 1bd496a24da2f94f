#pragma once

#include <span>
#include <string_view>

#include "ndv/nermask/types.hpp"

namespace ndv::ner {

// Replaces each span's surface text with "[MASK]". Spans separated only by
// whitespace (or touching) collapse into a single "[MASK]" and the
// whitespace between them is dropped. All other text is copied unchanged.
//
// Spans may arrive in any order. Overlap raises SpanOverlapError; an empty
// span or one past the end of the text raises SpanBoundsError.
MaskedArticle mask_spans(std::string_view text, std::span<const EntitySpan> spans,
                         std::string id = {});

}  // namespace ndv::ner
