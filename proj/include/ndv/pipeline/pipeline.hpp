#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ndv/corpus/corpus.hpp"
#include "ndv/embed/backend.hpp"
#include "ndv/embed/store.hpp"
#include "ndv/index/flat_index.hpp"
#include "ndv/nermask/backend.hpp"
#include "ndv/nermask/types.hpp"

namespace ndv::pipeline {

struct PipelineConfig {
  std::string ner_backend = "stub";    // "stub" or http:// URL
  std::string embed_backend = "stub";  // "stub" or http:// URL
  std::string model_name = std::string(embed::kDefaultModel);
  std::string ner_model_name = std::string(ner::kDefaultNerModel);
  std::size_t k = 5;
  std::size_t ner_batch = 64;
  std::size_t embed_batch = 256;
  std::size_t stub_dim = embed::kStubDim;
  std::optional<std::size_t> max_chars;
  unsigned workers = 1;
  http::RetryPolicy retry;

  // Throws ndv::Error when k or a batch size is 0.
  void validate() const;
};

// corpus -> NER -> mask -> embed -> search. Every stage wraps failures in
// StageError naming the stage and the offending article. Output order always
// matches input order, whatever the worker count.
class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);
  Pipeline(PipelineConfig config, std::shared_ptr<const ner::NerBackend> ner,
           std::shared_ptr<const embed::EmbeddingBackend> embedder);

  const PipelineConfig& config() const noexcept { return config_; }
  const ner::NerBackend& ner_backend() const noexcept { return *ner_; }
  const embed::EmbeddingBackend& embedding_backend() const noexcept { return *embedder_; }

  std::vector<ner::AnnotatedArticle> ner(std::span<const corpus::Article> articles) const;
  static std::vector<ner::MaskedArticle> mask(std::span<const ner::AnnotatedArticle> annotated);
  embed::EmbeddingStore embed(std::span<const ner::MaskedArticle> masked) const;

  // NER, masking and embedding in one call; row i belongs to article i.
  embed::EmbeddingStore mask_and_embed(std::span<const corpus::Article> articles) const;

  // Masks and embeds the queries, then searches the corpus index.
  std::vector<std::vector<index::SearchHit>> search_nearest_story(
      std::span<const corpus::Article> queries, const index::FlatIndex& corpus_index,
      std::size_t k) const;
  std::vector<std::vector<index::SearchHit>> search_nearest_story(
      std::span<const corpus::Article> queries, const embed::EmbeddingStore& corpus_store,
      std::size_t k) const;

  // Dimensionality of stores this pipeline produces, when known.
  std::size_t output_dim() const;

 private:
  PipelineConfig config_;
  std::shared_ptr<const ner::NerBackend> ner_;
  std::shared_ptr<const embed::EmbeddingBackend> embedder_;
};

struct NeighbourLists {
  std::vector<std::vector<float>> scores;
  std::vector<std::vector<std::string>> ids;
};

// Parallel score and id lists, one entry per query row.
NeighbourLists find_nearest_neighbours(const embed::EmbeddingStore& queries,
                                       const embed::EmbeddingStore& corpus, std::size_t k);

struct DownloadResult {
  std::vector<corpus::Article> articles;
  corpus::StreamStats stats;
};

// Resolves a corpus spec string against a manifest. The spec's dataset must
// name the manifest's dataset (case-insensitive); ManifestError otherwise.
DownloadResult download(std::string_view spec, const corpus::DatasetManifest& manifest);

// Stage files are JSONL; each reader reports the failing line on error.
void write_annotated(const std::filesystem::path& path,
                     std::span<const ner::AnnotatedArticle> rows);
std::vector<ner::AnnotatedArticle> read_annotated(const std::filesystem::path& path);
void write_masked(const std::filesystem::path& path, std::span<const ner::MaskedArticle> rows);
std::vector<ner::MaskedArticle> read_masked(const std::filesystem::path& path);

// hits.jsonl rows: {"query_id", "rank" (1-based), "id", "score"}.
struct HitRow {
  std::string query_id;
  std::size_t rank = 0;
  std::string id;
  float score = 0.0f;
};
void write_hits(const std::filesystem::path& path, std::span<const std::string> query_ids,
                std::span<const std::vector<index::SearchHit>> hits);
std::vector<HitRow> read_hits(const std::filesystem::path& path);

}  // namespace ndv::pipeline
