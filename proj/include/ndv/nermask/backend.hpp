#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ndv/common/http.hpp"
#include "ndv/nermask/types.hpp"

namespace ndv::ner {

using AnnotationBatch = std::vector<std::vector<TokenAnnotation>>;

// Token-level NER model. Implementations must be safe to call from several
// threads at once; a batch is the unit of request.
class NerBackend {
 public:
  virtual ~NerBackend() = default;
  virtual AnnotationBatch annotate(std::span<const std::string> texts) const = 0;
  virtual std::string describe() const = 0;
};

// Deterministic rule tagger standing in for a neural model.
//
// Tokens are runs of letters/digits (apostrophes allowed inside) and single
// punctuation marks. A maximal run of consecutive capitalized word tokens is
// an entity. When the run opens a sentence, its first token is dropped unless
// the gazetteer knows it. The class comes from the last gazetteer hit in the
// run, MISC when there is none.
class StubNerBackend final : public NerBackend {
 public:
  AnnotationBatch annotate(std::span<const std::string> texts) const override;
  std::string describe() const override { return "stub"; }

  std::vector<TokenAnnotation> tag(std::string_view text) const;

  // Untagged tokenization used by the rule set.
  static std::vector<TokenAnnotation> tokenize(std::string_view text);
  static std::optional<EntityClass> gazetteer_lookup(std::string_view word);
};

// Client for the JSON-over-HTTP NER protocol:
//   request  {"texts": [string]}
//   response {"annotations": [[{"token", "start", "end", "tag"}]]}
class RemoteNerBackend final : public NerBackend {
 public:
  explicit RemoteNerBackend(http::Endpoint endpoint, http::RetryPolicy policy = {});

  AnnotationBatch annotate(std::span<const std::string> texts) const override;
  std::string describe() const override { return endpoint_.str(); }

 private:
  http::Endpoint endpoint_;
  http::RetryPolicy policy_;
};

inline constexpr std::string_view kDefaultNerModel = "historical_newspaper_ner";

// "stub" or an http:// URL.
std::unique_ptr<NerBackend> make_ner_backend(std::string_view spec,
                                             http::RetryPolicy policy = {});

// Throws ProtocolError unless every token lies inside the text, is
// non-empty, and follows the previous one.
void validate_annotations(std::string_view text, std::span<const TokenAnnotation> tokens);

// Runs the backend and checks its reply against the inputs.
AnnotationBatch annotate(const NerBackend& backend, std::span<const std::string> texts);

// Wire helpers shared by client and server.
nlohmann::json annotations_to_json(const AnnotationBatch& batch);
AnnotationBatch annotations_from_json(const nlohmann::json& reply);

}  // namespace ndv::ner
