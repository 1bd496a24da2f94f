#include "ndv/embed/backend.hpp"

#include <cmath>

#include "ndv/common/error.hpp"
#include "ndv/common/utf8.hpp"

namespace ndv::embed {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

StubEmbeddingBackend::StubEmbeddingBackend(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw InvariantError("stub embedding dim must be at least 1");
}

std::vector<std::int64_t> StubEmbeddingBackend::feature_counts(std::string_view text) const {
  std::vector<std::string> words;
  std::string current;
  for (std::size_t pos = 0; pos < text.size();) {
    const std::size_t len = utf8::sequence_length(text, pos);
    if (utf8::is_whitespace(utf8::decode_at(text, pos))) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else {
      for (std::size_t i = 0; i < len; ++i) {
        char c = text[pos + i];
        current.push_back(c >= 'A' && c <= 'Z' ? char(c - 'A' + 'a') : c);
      }
    }
    pos += len;
  }
  if (!current.empty()) words.push_back(std::move(current));

  std::vector<std::int64_t> counts(dim_, 0);
  const auto add = [&](std::string_view feature) {
    const std::uint64_t h = fnv1a64(feature);
    counts[h % dim_] += (h >> 63) ? -1 : 1;
  };
  for (std::size_t i = 0; i < words.size(); ++i) {
    add(words[i]);
    if (i + 1 < words.size()) add(words[i] + " " + words[i + 1]);
  }
  return counts;
}

RawBatch StubEmbeddingBackend::encode(std::span<const std::string> texts) const {
  RawBatch out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    const auto counts = feature_counts(text);
    out.emplace_back(counts.begin(), counts.end());
  }
  return out;
}

RemoteEmbeddingBackend::RemoteEmbeddingBackend(http::Endpoint endpoint, std::string model,
                                               http::RetryPolicy policy)
    : endpoint_(std::move(endpoint)), model_(std::move(model)), policy_(policy) {}

std::optional<std::size_t> RemoteEmbeddingBackend::dim() const {
  const std::size_t d = dim_.load();
  if (d == 0) return std::nullopt;
  return d;
}

RawBatch RemoteEmbeddingBackend::encode(std::span<const std::string> texts) const {
  nlohmann::json request = {{"texts", nlohmann::json::array()}, {"model", model_}};
  for (const auto& t : texts) request["texts"].push_back(t);
  auto batch = vectors_from_json(http::post_json(endpoint_, request, policy_), texts.size());
  if (batch.empty()) return batch;
  std::size_t expected = 0;
  const std::size_t got = batch.front().size();
  if (!dim_.compare_exchange_strong(expected, got) && expected != got) {
    throw ProtocolError(endpoint_.str() + " changed dim from " + std::to_string(expected) +
                        " to " + std::to_string(got));
  }
  return batch;
}

std::unique_ptr<EmbeddingBackend> make_embedding_backend(std::string_view spec, std::string model,
                                                         std::size_t stub_dim,
                                                         http::RetryPolicy policy) {
  if (spec == "stub") return std::make_unique<StubEmbeddingBackend>(stub_dim);
  return std::make_unique<RemoteEmbeddingBackend>(http::parse_endpoint(spec), std::move(model),
                                                  policy);
}

std::vector<EmbeddingVector> embed_batch(const EmbeddingBackend& backend,
                                         std::span<const std::string> texts,
                                         const EmbedOptions& options) {
  if (texts.empty()) return {};
  std::vector<std::string> truncated;
  std::span<const std::string> inputs = texts;
  if (options.max_chars) {
    truncated.reserve(texts.size());
    for (const auto& t : texts) truncated.push_back(utf8::prefix(t, *options.max_chars));
    inputs = truncated;
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].empty()) throw EmptyText("text " + std::to_string(i) + " of batch is empty");
  }

  const RawBatch raw = backend.encode(inputs);
  if (raw.size() != inputs.size()) {
    throw ProtocolError(backend.describe() + " returned " + std::to_string(raw.size()) +
                        " vectors for " + std::to_string(inputs.size()) + " texts");
  }
  const std::size_t dim = raw.front().size();
  if (dim == 0) throw ProtocolError(backend.describe() + " returned an empty vector");
  if (auto known = backend.dim(); known && *known != dim) {
    throw ProtocolError(backend.describe() + " returned dim " + std::to_string(dim) +
                        ", expected " + std::to_string(*known));
  }
  std::vector<EmbeddingVector> out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].size() != dim) {
      throw ProtocolError(backend.describe() + " returned mixed dims within one batch");
    }
    out.push_back(l2_normalize(std::span<const float>(raw[i])));
  }
  return out;
}

nlohmann::json vectors_to_json(std::size_t dim, const RawBatch& batch) {
  return {{"dim", dim}, {"vectors", batch}};
}

RawBatch vectors_from_json(const nlohmann::json& reply, std::size_t expected_count) {
  if (!reply.is_object() || !reply.contains("dim") || !reply["dim"].is_number_unsigned() ||
      !reply.contains("vectors") || !reply["vectors"].is_array()) {
    throw ProtocolError("embedding reply needs unsigned 'dim' and array 'vectors'");
  }
  const auto dim = reply["dim"].get<std::size_t>();
  const auto& vectors = reply["vectors"];
  if (dim == 0) throw ProtocolError("embedding reply declares dim 0");
  if (vectors.size() != expected_count) {
    throw ProtocolError("embedding reply has " + std::to_string(vectors.size()) +
                        " vectors for " + std::to_string(expected_count) + " texts");
  }
  RawBatch batch;
  batch.reserve(vectors.size());
  for (const auto& v : vectors) {
    if (!v.is_array() || v.size() != dim) {
      throw ProtocolError("embedding reply vector does not match declared dim " +
                          std::to_string(dim));
    }
    auto& row = batch.emplace_back();
    row.reserve(dim);
    for (const auto& x : v) {
      if (!x.is_number()) throw ProtocolError("embedding reply vector has a non-number");
      const double d = x.get<double>();
      if (!std::isfinite(d)) throw ProtocolError("embedding reply vector has a non-finite value");
      row.push_back(float(d));
    }
  }
  return batch;
}

}  // namespace ndv::embed
