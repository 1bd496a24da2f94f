#include "ndv/nermask/mask.hpp"

#include <algorithm>
#include <string>

#include "ndv/common/error.hpp"
#include "ndv/common/utf8.hpp"

namespace ndv::ner {

namespace {

bool only_whitespace(std::string_view text, std::size_t from_byte, std::size_t to_byte) {
  for (std::size_t pos = from_byte; pos < to_byte; pos += utf8::sequence_length(text, pos)) {
    if (!utf8::is_whitespace(utf8::decode_at(text, pos))) return false;
  }
  return true;
}

}  // namespace

MaskedArticle mask_spans(std::string_view text, std::span<const EntitySpan> spans,
                         std::string id) {
  MaskedArticle out;
  out.id = std::move(id);
  out.span_count = spans.size();
  if (spans.empty()) {
    out.masked_text = std::string(text);
    return out;
  }

  const auto offsets = utf8::scalar_offsets(text);
  const std::size_t length = offsets.size() - 1;

  std::vector<EntitySpan> sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end(), [](const EntitySpan& a, const EntitySpan& b) {
    return a.start != b.start ? a.start < b.start : a.end < b.end;
  });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& s = sorted[i];
    if (s.start >= s.end || s.end > length) {
      throw SpanBoundsError("span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                            ") is empty or outside text of length " + std::to_string(length));
    }
    if (i > 0 && s.start < sorted[i - 1].end) {
      throw SpanOverlapError("span [" + std::to_string(s.start) + ", " + std::to_string(s.end) +
                             ") overlaps the preceding span");
    }
  }

  std::string& masked = out.masked_text;
  masked.reserve(text.size());
  std::size_t copied_to = 0;  // byte offset
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const std::size_t begin = offsets[sorted[i].start];
    const std::size_t end = offsets[sorted[i].end];
    const bool joins_previous = i > 0 && only_whitespace(text, copied_to, begin);
    if (!joins_previous) {
      masked.append(text.substr(copied_to, begin - copied_to));
      masked.append(kMaskToken);
      ++out.mask_count;
    }
    copied_to = end;
  }
  masked.append(text.substr(copied_to));
  return out;
}

}  // namespace ndv::ner
