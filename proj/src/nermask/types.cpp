#include "ndv/nermask/types.hpp"

#include "ndv/common/error.hpp"

namespace ndv::ner {

std::string_view to_string(EntityClass cls) noexcept {
  switch (cls) {
    case EntityClass::PER: return "PER";
    case EntityClass::ORG: return "ORG";
    case EntityClass::LOC: return "LOC";
    case EntityClass::MISC: return "MISC";
  }
  return "MISC";
}

std::optional<EntityClass> parse_entity_class(std::string_view name) noexcept {
  for (auto cls : kEntityClasses) {
    if (to_string(cls) == name) return cls;
  }
  return std::nullopt;
}

BioTag BioTag::parse(std::string_view tag) {
  if (tag == "O") return outside();
  if (tag.size() > 2 && tag[1] == '-' && (tag[0] == 'B' || tag[0] == 'I')) {
    if (auto cls = parse_entity_class(tag.substr(2))) {
      return tag[0] == 'B' ? begin(*cls) : inside(*cls);
    }
  }
  throw AnnotationError("tag '" + std::string(tag) + "' is not in the BIO tagset");
}

std::string BioTag::str() const {
  switch (kind) {
    case Kind::Outside: return "O";
    case Kind::Begin: return "B-" + std::string(to_string(cls));
    case Kind::Inside: return "I-" + std::string(to_string(cls));
  }
  return "O";
}

nlohmann::json to_json(const TokenAnnotation& t) {
  return {{"token", t.token}, {"start", t.start}, {"end", t.end}, {"tag", t.tag.str()}};
}

TokenAnnotation token_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("start") || !j.contains("end") || !j.contains("tag") ||
      !j["start"].is_number_unsigned() || !j["end"].is_number_unsigned() ||
      !j["tag"].is_string()) {
    throw AnnotationError("token annotation needs unsigned 'start', 'end' and string 'tag'");
  }
  TokenAnnotation t;
  if (j.contains("token") && j["token"].is_string()) t.token = j["token"].get<std::string>();
  t.start = j["start"].get<std::size_t>();
  t.end = j["end"].get<std::size_t>();
  t.tag = BioTag::parse(j["tag"].get<std::string>());
  return t;
}

nlohmann::json to_json(const AnnotatedArticle& a) {
  auto j = corpus::to_json(a.article);
  auto& tokens = j["annotations"] = nlohmann::json::array();
  for (const auto& t : a.annotations) tokens.push_back(to_json(t));
  return j;
}

AnnotatedArticle annotated_from_json(const nlohmann::json& j) {
  AnnotatedArticle a;
  a.article = corpus::validate_article(j);
  const auto it = j.find("annotations");
  if (it == j.end() || !it->is_array()) {
    throw MissingField("annotated record '" + a.article.id + "' has no 'annotations' array");
  }
  for (const auto& t : *it) a.annotations.push_back(token_from_json(t));
  return a;
}

nlohmann::json to_json(const MaskedArticle& m) {
  return {{"id", m.id},
          {"masked_text", m.masked_text},
          {"span_count", m.span_count},
          {"mask_count", m.mask_count}};
}

MaskedArticle masked_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
    throw MissingField("masked record needs string 'id'");
  }
  MaskedArticle m;
  m.id = j["id"].get<std::string>();
  // Plain article rows are accepted too, embedding their unmasked text.
  if (j.contains("masked_text") && j["masked_text"].is_string()) {
    m.masked_text = j["masked_text"].get<std::string>();
  } else if (j.contains("text") && j["text"].is_string()) {
    m.masked_text = j["text"].get<std::string>();
  } else {
    throw MissingField("masked record '" + m.id + "' has neither 'masked_text' nor 'text'");
  }
  m.span_count = j.value("span_count", std::size_t{0});
  m.mask_count = j.value("mask_count", std::size_t{0});
  return m;
}

}  // namespace ndv::ner
