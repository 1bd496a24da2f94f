#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ndv/common/http.hpp"
#include "ndv/embed/vector.hpp"

namespace ndv::embed {

using RawBatch = std::vector<std::vector<float>>;

// Text encoder. Output need not be normalized; embed_batch normalizes.
// Implementations must be safe to call concurrently.
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual RawBatch encode(std::span<const std::string> texts) const = 0;
  // Known output dimensionality, if any yet.
  virtual std::optional<std::size_t> dim() const = 0;
  virtual std::string describe() const = 0;
};

inline constexpr std::size_t kStubDim = 256;
inline constexpr std::size_t kDefaultModelDim = 768;
inline constexpr std::string_view kDefaultModel = "same-story";

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

// Hashed bag of lowercase whitespace unigrams and bigrams ("w1 w2"). Each
// feature adds ±1 to bucket hash % dim; the sign is - when the hash's top
// bit is set. Integer arithmetic only, so output is identical everywhere.
class StubEmbeddingBackend final : public EmbeddingBackend {
 public:
  explicit StubEmbeddingBackend(std::size_t dim = kStubDim);

  RawBatch encode(std::span<const std::string> texts) const override;
  std::optional<std::size_t> dim() const override { return dim_; }
  std::string describe() const override { return "stub"; }

  std::vector<std::int64_t> feature_counts(std::string_view text) const;

 private:
  std::size_t dim_;
};

// Client for the JSON-over-HTTP embedding protocol:
//   request  {"texts": [string], "model": string}
//   response {"dim": int, "vectors": [[float]]}
// The first reply fixes the dimensionality; a later reply with another dim
// is a ProtocolError.
class RemoteEmbeddingBackend final : public EmbeddingBackend {
 public:
  RemoteEmbeddingBackend(http::Endpoint endpoint, std::string model,
                         http::RetryPolicy policy = {});

  RawBatch encode(std::span<const std::string> texts) const override;
  std::optional<std::size_t> dim() const override;
  std::string describe() const override { return endpoint_.str(); }

 private:
  http::Endpoint endpoint_;
  std::string model_;
  http::RetryPolicy policy_;
  mutable std::atomic<std::size_t> dim_{0};
};

// "stub" or an http:// URL. `stub_dim` only applies to the stub.
std::unique_ptr<EmbeddingBackend> make_embedding_backend(
    std::string_view spec, std::string model = std::string(kDefaultModel),
    std::size_t stub_dim = kStubDim, http::RetryPolicy policy = {});

struct EmbedOptions {
  // Truncate each text to this many scalar values before encoding.
  std::optional<std::size_t> max_chars;
};

// One unit-norm vector per text, in input order. Throws EmptyText on an
// empty input, ProtocolError when the backend's shape is inconsistent, and
// ZeroVectorError when a text encodes to the zero vector.
std::vector<EmbeddingVector> embed_batch(const EmbeddingBackend& backend,
                                         std::span<const std::string> texts,
                                         const EmbedOptions& options = {});

nlohmann::json vectors_to_json(std::size_t dim, const RawBatch& batch);
RawBatch vectors_from_json(const nlohmann::json& reply, std::size_t expected_count);

}  // namespace ndv::embed
