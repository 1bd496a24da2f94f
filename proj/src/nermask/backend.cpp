#include "ndv/nermask/backend.hpp"

#include <algorithm>
#include <unordered_map>

#include "ndv/common/error.hpp"
#include "ndv/common/utf8.hpp"

namespace ndv::ner {

namespace {

bool is_word_scalar(char32_t cp) noexcept {
  if (cp < 0x80) {
    return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') || (cp >= U'0' && cp <= U'9');
  }
  if (cp < 0xC0 || cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
  return !utf8::is_whitespace(cp);
}

bool is_apostrophe(char32_t cp) noexcept { return cp == U'\'' || cp == 0x2019; }

bool is_sentence_end(std::string_view token) noexcept {
  return token == "." || token == "!" || token == "?";
}

bool is_capitalized(std::string_view token) noexcept {
  return !token.empty() && token[0] >= 'A' && token[0] <= 'Z';
}

const std::unordered_map<std::string, EntityClass>& gazetteer() {
  static const std::unordered_map<std::string, EntityClass> table = [] {
    std::unordered_map<std::string, EntityClass> t;
    for (const char* w : {"john", "mary", "james", "william", "george", "robert", "charles",
                          "thomas", "joseph", "ben", "jerry", "smith", "johnson", "roosevelt",
                          "truman", "lincoln", "eisenhower", "kennedy"}) {
      t.emplace(w, EntityClass::PER);
    }
    for (const char* w : {"congress", "senate", "company", "corporation", "corp", "inc", "board",
                          "university", "bank", "army", "navy", "association", "union",
                          "department", "committee", "party", "court", "bureau"}) {
      t.emplace(w, EntityClass::ORG);
    }
    for (const char* w : {"paris", "london", "washington", "alabama", "york", "america", "city",
                          "county", "france", "germany", "england", "texas", "chicago", "iowa",
                          "ohio", "river", "street", "europe"}) {
      t.emplace(w, EntityClass::LOC);
    }
    return t;
  }();
  return table;
}

}  // namespace

std::optional<EntityClass> StubNerBackend::gazetteer_lookup(std::string_view word) {
  std::string key;
  key.reserve(word.size());
  for (char c : word) key.push_back(c >= 'A' && c <= 'Z' ? char(c - 'A' + 'a') : c);
  for (std::string_view suffix : {"'s", "\xE2\x80\x99s"}) {
    if (key.size() > suffix.size() && key.ends_with(suffix)) {
      key.resize(key.size() - suffix.size());
      break;
    }
  }
  const auto& table = gazetteer();
  const auto it = table.find(key);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenAnnotation> StubNerBackend::tokenize(std::string_view text) {
  const std::u32string scalars = utf8::decode(text);
  std::vector<TokenAnnotation> tokens;
  std::size_t i = 0;
  while (i < scalars.size()) {
    const char32_t cp = scalars[i];
    if (utf8::is_whitespace(cp)) {
      ++i;
      continue;
    }
    std::size_t end = i + 1;
    if (is_word_scalar(cp)) {
      while (end < scalars.size()) {
        if (is_word_scalar(scalars[end])) {
          ++end;
        } else if (is_apostrophe(scalars[end]) && end + 1 < scalars.size() &&
                   is_word_scalar(scalars[end + 1])) {
          end += 2;
        } else {
          break;
        }
      }
    }
    tokens.push_back({utf8::encode(std::u32string_view(scalars).substr(i, end - i)), i, end,
                      BioTag::outside()});
    i = end;
  }
  return tokens;
}

std::vector<TokenAnnotation> StubNerBackend::tag(std::string_view text) const {
  auto tokens = tokenize(text);
  std::size_t i = 0;
  while (i < tokens.size()) {
    if (!is_capitalized(tokens[i].token)) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end < tokens.size() && is_capitalized(tokens[end].token)) ++end;
    std::size_t begin = i;
    const bool sentence_start = i == 0 || is_sentence_end(tokens[i - 1].token);
    if (sentence_start && !gazetteer_lookup(tokens[i].token)) ++begin;
    if (begin < end) {
      EntityClass cls = EntityClass::MISC;
      for (std::size_t t = end; t-- > begin;) {
        if (auto hit = gazetteer_lookup(tokens[t].token)) {
          cls = *hit;
          break;
        }
      }
      tokens[begin].tag = BioTag::begin(cls);
      for (std::size_t t = begin + 1; t < end; ++t) tokens[t].tag = BioTag::inside(cls);
    }
    i = end;
  }
  return tokens;
}

AnnotationBatch StubNerBackend::annotate(std::span<const std::string> texts) const {
  AnnotationBatch out;
  out.reserve(texts.size());
  for (const auto& text : texts) out.push_back(tag(text));
  return out;
}

RemoteNerBackend::RemoteNerBackend(http::Endpoint endpoint, http::RetryPolicy policy)
    : endpoint_(std::move(endpoint)), policy_(policy) {}

AnnotationBatch RemoteNerBackend::annotate(std::span<const std::string> texts) const {
  nlohmann::json request = {{"texts", nlohmann::json::array()}};
  for (const auto& t : texts) request["texts"].push_back(t);
  return annotations_from_json(http::post_json(endpoint_, request, policy_));
}

std::unique_ptr<NerBackend> make_ner_backend(std::string_view spec, http::RetryPolicy policy) {
  if (spec == "stub") return std::make_unique<StubNerBackend>();
  return std::make_unique<RemoteNerBackend>(http::parse_endpoint(spec), policy);
}

void validate_annotations(std::string_view text, std::span<const TokenAnnotation> tokens) {
  const std::size_t length = utf8::scalar_length(text);
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.start >= t.end || t.end > length) {
      throw ProtocolError("token " + std::to_string(i) + " range [" + std::to_string(t.start) +
                          ", " + std::to_string(t.end) + ") invalid for text of length " +
                          std::to_string(length));
    }
    if (i > 0 && t.start < prev_end) {
      throw ProtocolError("token " + std::to_string(i) + " overlaps or precedes its predecessor");
    }
    prev_end = t.end;
  }
}

AnnotationBatch annotate(const NerBackend& backend, std::span<const std::string> texts) {
  if (texts.empty()) return {};
  auto batch = backend.annotate(texts);
  if (batch.size() != texts.size()) {
    throw ProtocolError(backend.describe() + " returned " + std::to_string(batch.size()) +
                        " annotation lists for " + std::to_string(texts.size()) + " texts");
  }
  for (std::size_t i = 0; i < texts.size(); ++i) validate_annotations(texts[i], batch[i]);
  return batch;
}

nlohmann::json annotations_to_json(const AnnotationBatch& batch) {
  nlohmann::json lists = nlohmann::json::array();
  for (const auto& tokens : batch) {
    auto& list = lists.emplace_back(nlohmann::json::array());
    for (const auto& t : tokens) list.push_back(to_json(t));
  }
  return {{"annotations", std::move(lists)}};
}

AnnotationBatch annotations_from_json(const nlohmann::json& reply) {
  if (!reply.is_object() || !reply.contains("annotations") || !reply["annotations"].is_array()) {
    throw ProtocolError("NER reply lacks an 'annotations' array");
  }
  AnnotationBatch batch;
  for (const auto& list : reply["annotations"]) {
    if (!list.is_array()) throw ProtocolError("NER reply entry is not a list of tokens");
    auto& tokens = batch.emplace_back();
    for (const auto& t : list) {
      try {
        tokens.push_back(token_from_json(t));
      } catch (const AnnotationError& e) {
        throw ProtocolError(std::string("malformed NER token: ") + e.what());
      }
    }
  }
  return batch;
}

}  // namespace ndv::ner
