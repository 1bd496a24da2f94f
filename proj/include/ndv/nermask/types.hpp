#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ndv/corpus/corpus.hpp"

namespace ndv::ner {

enum class EntityClass : std::uint8_t { PER, ORG, LOC, MISC };

inline constexpr std::array<EntityClass, 4> kEntityClasses = {
    EntityClass::PER, EntityClass::ORG, EntityClass::LOC, EntityClass::MISC};

std::string_view to_string(EntityClass cls) noexcept;
std::optional<EntityClass> parse_entity_class(std::string_view name) noexcept;

// One label of the BIO tagset {O} ∪ {B-,I-}×{PER,ORG,LOC,MISC}.
struct BioTag {
  enum class Kind : std::uint8_t { Outside, Begin, Inside };

  Kind kind = Kind::Outside;
  EntityClass cls = EntityClass::MISC;  // ignored for Outside

  static BioTag outside() noexcept { return {}; }
  static BioTag begin(EntityClass c) noexcept { return {Kind::Begin, c}; }
  static BioTag inside(EntityClass c) noexcept { return {Kind::Inside, c}; }

  bool is_outside() const noexcept { return kind == Kind::Outside; }

  // Throws AnnotationError on anything outside the tagset.
  static BioTag parse(std::string_view tag);
  std::string str() const;

  friend bool operator==(const BioTag& a, const BioTag& b) noexcept {
    return a.kind == b.kind && (a.kind == Kind::Outside || a.cls == b.cls);
  }
};

// Offsets are scalar-value indices into the article text, half-open.
struct TokenAnnotation {
  std::string token;
  std::size_t start = 0;
  std::size_t end = 0;
  BioTag tag;

  friend bool operator==(const TokenAnnotation&, const TokenAnnotation&) = default;
};

struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  EntityClass cls = EntityClass::MISC;

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

struct AnnotatedArticle {
  corpus::Article article;
  std::vector<TokenAnnotation> annotations;
};

struct MaskedArticle {
  std::string id;
  std::string masked_text;
  // Spans replaced, before adjacent spans collapse.
  std::size_t span_count = 0;
  // "[MASK]" tokens emitted, after collapse.
  std::size_t mask_count = 0;
};

inline constexpr std::string_view kMaskToken = "[MASK]";

nlohmann::json to_json(const TokenAnnotation& t);
TokenAnnotation token_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AnnotatedArticle& a);
AnnotatedArticle annotated_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MaskedArticle& m);
MaskedArticle masked_from_json(const nlohmann::json& j);

}  // namespace ndv::ner
