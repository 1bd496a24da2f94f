#include "ndv/nermask/bio.hpp"

#include <string>

#include "ndv/common/error.hpp"

namespace ndv::ner {

std::vector<EntitySpan> decode_bio(std::span<const TokenAnnotation> annotations) {
  std::vector<EntitySpan> spans;
  std::size_t prev_end = 0;
  bool open = false;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& tok = annotations[i];
    if (tok.start >= tok.end) {
      throw AnnotationError("token " + std::to_string(i) + " has empty range [" +
                            std::to_string(tok.start) + ", " + std::to_string(tok.end) + ")");
    }
    if (i > 0 && tok.start < prev_end) {
      throw AnnotationError("token " + std::to_string(i) + " overlaps or precedes token " +
                            std::to_string(i - 1));
    }
    prev_end = tok.end;

    switch (tok.tag.kind) {
      case BioTag::Kind::Outside:
        open = false;
        break;
      case BioTag::Kind::Inside:
        if (open && spans.back().cls == tok.tag.cls) {
          spans.back().end = tok.end;
          break;
        }
        [[fallthrough]];  // dangling I-X starts a span
      case BioTag::Kind::Begin:
        spans.push_back({tok.start, tok.end, tok.tag.cls});
        open = true;
        break;
    }
  }
  return spans;
}

std::vector<BioTag> encode_bio(std::span<const std::pair<std::size_t, std::size_t>> tokens,
                               std::span<const EntitySpan> spans) {
  std::vector<BioTag> tags(tokens.size());
  std::size_t t = 0;
  for (const auto& span : spans) {
    while (t < tokens.size() && tokens[t].second <= span.start) ++t;
    if (t == tokens.size() || tokens[t].first != span.start) {
      throw AnnotationError("span [" + std::to_string(span.start) + ", " +
                            std::to_string(span.end) + ") does not start on a token boundary");
    }
    tags[t++] = BioTag::begin(span.cls);
    while (t < tokens.size() && tokens[t].second <= span.end) tags[t++] = BioTag::inside(span.cls);
    if (tokens[t - 1].second != span.end) {
      throw AnnotationError("span [" + std::to_string(span.start) + ", " +
                            std::to_string(span.end) + ") does not end on a token boundary");
    }
  }
  return tags;
}

std::vector<BioTag> repair_tags(std::span<const BioTag> tags) {
  std::vector<BioTag> out(tags.begin(), tags.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].kind != BioTag::Kind::Inside) continue;
    const bool continues = i > 0 && !out[i - 1].is_outside() && out[i - 1].cls == out[i].cls;
    if (!continues) out[i].kind = BioTag::Kind::Begin;
  }
  return out;
}

bool is_valid_span_set(std::span<const EntitySpan> spans) noexcept {
  for (std::size_t i = 0; i < spans.size(); ++i) {
    if (spans[i].start >= spans[i].end) return false;
    if (i > 0 && spans[i].start < spans[i - 1].end) return false;
  }
  return true;
}

EntityCounts count_entities(std::span<const std::vector<EntitySpan>> per_article) {
  EntityCounts counts;
  counts.articles = per_article.size();
  for (const auto& spans : per_article) {
    for (const auto& s : spans) ++counts.by_class[std::size_t(s.cls)];
  }
  return counts;
}

}  // namespace ndv::ner
