#include "ndv/pipeline/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <thread>

#include "ndv/common/error.hpp"
#include "ndv/nermask/bio.hpp"
#include "ndv/nermask/mask.hpp"

namespace ndv::pipeline {

namespace {

// Calls fn(begin, end) for every batch. With several workers, batches run
// concurrently; the error of the earliest failing batch is rethrown.
template <typename Fn>
void for_each_batch(std::size_t n, std::size_t batch, unsigned workers, Fn&& fn) {
  const std::size_t batches = (n + batch - 1) / batch;
  const auto run = [&](std::size_t b) { fn(b * batch, std::min(n, (b + 1) * batch)); };
  if (workers <= 1 || batches <= 1) {
    for (std::size_t b = 0; b < batches; ++b) run(b);
    return;
  }
  std::vector<std::exception_ptr> errors(batches);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(workers, batches); ++w) {
      pool.emplace_back([&] {
        for (std::size_t b; (b = next.fetch_add(1)) < batches;) {
          try {
            run(b);
          } catch (...) {
            errors[b] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

[[noreturn]] void fail(std::string_view stage, const std::string& id, const std::exception& e) {
  const bool down = dynamic_cast<const BackendUnavailable*>(&e) != nullptr;
  throw StageError(std::string(stage), id, e.what(), down);
}

// Runs a batch call; when it fails for a reason other than an unreachable
// backend, retries items one at a time to name the article at fault.
template <typename Call>
auto run_batch(std::string_view stage, std::span<const std::string> ids,
               std::span<const std::string> texts, Call&& call) {
  try {
    return call(texts);
  } catch (const BackendUnavailable& e) {
    fail(stage, ids.empty() ? std::string() : ids.front(), e);
  } catch (const Error& e) {
    for (std::size_t i = 0; i < texts.size(); ++i) {
      try {
        call(texts.subspan(i, 1));
      } catch (const Error& single) {
        fail(stage, ids[i], single);
      }
    }
    fail(stage, ids.empty() ? std::string() : ids.front(), e);
  }
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = char(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

template <typename Row, typename Parse>
std::vector<Row> read_jsonl(const std::filesystem::path& path, Parse&& parse) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<Row> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(parse(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw RecordError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw RecordError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

template <typename Rows, typename Dump>
void write_jsonl(const std::filesystem::path& path, const Rows& rows, Dump&& dump) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& row : rows) out << dump(row).dump() << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

void PipelineConfig::validate() const {
  if (k == 0) throw BadK("pipeline k must be at least 1");
  if (ner_batch == 0 || embed_batch == 0) throw Error("pipeline batch sizes must be at least 1");
  if (stub_dim == 0) throw Error("stub embedding dim must be at least 1");
}

Pipeline::Pipeline(PipelineConfig config)
    : Pipeline(config, ner::make_ner_backend(config.ner_backend, config.retry),
               embed::make_embedding_backend(config.embed_backend, config.model_name,
                                             config.stub_dim, config.retry)) {}

Pipeline::Pipeline(PipelineConfig config, std::shared_ptr<const ner::NerBackend> ner,
                   std::shared_ptr<const embed::EmbeddingBackend> embedder)
    : config_(std::move(config)), ner_(std::move(ner)), embedder_(std::move(embedder)) {
  config_.validate();
}

std::size_t Pipeline::output_dim() const {
  if (auto d = embedder_->dim()) return *d;
  return config_.embed_backend == "stub" ? config_.stub_dim : embed::kDefaultModelDim;
}

std::vector<ner::AnnotatedArticle> Pipeline::ner(std::span<const corpus::Article> articles) const {
  std::vector<ner::AnnotatedArticle> out(articles.size());
  for_each_batch(articles.size(), config_.ner_batch, config_.workers,
                 [&](std::size_t begin, std::size_t end) {
                   std::vector<std::string> ids, texts;
                   for (std::size_t i = begin; i < end; ++i) {
                     ids.push_back(articles[i].id);
                     texts.push_back(articles[i].text);
                   }
                   auto batch = run_batch("ner", ids, texts, [&](std::span<const std::string> t) {
                     return ner::annotate(*ner_, t);
                   });
                   for (std::size_t i = begin; i < end; ++i) {
                     out[i].article = articles[i];
                     out[i].annotations = std::move(batch[i - begin]);
                   }
                 });
  return out;
}

std::vector<ner::MaskedArticle> Pipeline::mask(std::span<const ner::AnnotatedArticle> annotated) {
  std::vector<ner::MaskedArticle> out;
  out.reserve(annotated.size());
  for (const auto& a : annotated) {
    try {
      const auto spans = ner::decode_bio(a.annotations);
      out.push_back(ner::mask_spans(a.article.text, spans, a.article.id));
    } catch (const Error& e) {
      fail("mask", a.article.id, e);
    }
  }
  return out;
}

embed::EmbeddingStore Pipeline::embed(std::span<const ner::MaskedArticle> masked) const {
  std::vector<std::string> ids;
  ids.reserve(masked.size());
  for (const auto& m : masked) ids.push_back(m.id);
  if (masked.empty()) {
    return embed::EmbeddingStore::from_rows(output_dim(), {}, {});
  }

  std::vector<embed::EmbeddingVector> vectors(masked.size());
  const embed::EmbedOptions options{config_.max_chars};
  for_each_batch(masked.size(), config_.embed_batch, config_.workers,
                 [&](std::size_t begin, std::size_t end) {
                   std::vector<std::string> texts;
                   for (std::size_t i = begin; i < end; ++i) texts.push_back(masked[i].masked_text);
                   auto batch = run_batch(
                       "embed", std::span<const std::string>(ids).subspan(begin, end - begin),
                       texts, [&](std::span<const std::string> t) {
                         return embed::embed_batch(*embedder_, t, options);
                       });
                   for (std::size_t i = begin; i < end; ++i) vectors[i] = std::move(batch[i - begin]);
                 });

  const std::size_t dim = vectors.front().dim();
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].dim() != dim) {
      throw StageError("embed", ids[i], "backend changed dim across batches", false);
    }
  }
  try {
    return embed::EmbeddingStore::from_vectors(dim, vectors, std::move(ids));
  } catch (const Error& e) {
    fail("embed", "", e);
  }
}

embed::EmbeddingStore Pipeline::mask_and_embed(std::span<const corpus::Article> articles) const {
  const auto annotated = ner(articles);
  const auto masked = mask(annotated);
  return embed(masked);
}

std::vector<std::vector<index::SearchHit>> Pipeline::search_nearest_story(
    std::span<const corpus::Article> queries, const index::FlatIndex& corpus_index,
    std::size_t k) const {
  const auto query_store = mask_and_embed(queries);
  try {
    return corpus_index.search_batch(query_store, k, {.threads = config_.workers});
  } catch (const Error& e) {
    fail("search", "", e);
  }
}

std::vector<std::vector<index::SearchHit>> Pipeline::search_nearest_story(
    std::span<const corpus::Article> queries, const embed::EmbeddingStore& corpus_store,
    std::size_t k) const {
  return search_nearest_story(queries, index::FlatIndex::build({corpus_store}), k);
}

NeighbourLists find_nearest_neighbours(const embed::EmbeddingStore& queries,
                                       const embed::EmbeddingStore& corpus, std::size_t k) {
  const auto index = index::FlatIndex::build({corpus});
  if (queries.dim() != corpus.dim()) {
    throw DimMismatchError("query store has dim " + std::to_string(queries.dim()) +
                           ", corpus store has dim " + std::to_string(corpus.dim()));
  }
  const auto hits = index.search_batch(queries, k);
  NeighbourLists out;
  out.scores.reserve(hits.size());
  out.ids.reserve(hits.size());
  for (const auto& list : hits) {
    auto& scores = out.scores.emplace_back();
    auto& ids = out.ids.emplace_back();
    for (const auto& h : list) {
      scores.push_back(h.score);
      ids.push_back(h.id);
    }
  }
  return out;
}

DownloadResult download(std::string_view spec, const corpus::DatasetManifest& manifest) {
  auto parsed = corpus::parse_corpus_spec(spec);
  if (lower(parsed.dataset) != lower(manifest.dataset_name)) {
    throw ManifestError("spec asks for dataset '" + parsed.dataset + "' but the manifest holds '" +
                        manifest.dataset_name + "'");
  }
  auto stream = corpus::stream_articles(manifest, std::move(parsed));
  DownloadResult result;
  while (auto a = stream.next()) result.articles.push_back(std::move(*a));
  result.stats = stream.stats();
  return result;
}

void write_annotated(const std::filesystem::path& path,
                     std::span<const ner::AnnotatedArticle> rows) {
  write_jsonl(path, rows, [](const auto& r) { return ner::to_json(r); });
}

std::vector<ner::AnnotatedArticle> read_annotated(const std::filesystem::path& path) {
  return read_jsonl<ner::AnnotatedArticle>(
      path, [](const nlohmann::json& j) { return ner::annotated_from_json(j); });
}

void write_masked(const std::filesystem::path& path, std::span<const ner::MaskedArticle> rows) {
  write_jsonl(path, rows, [](const auto& r) { return ner::to_json(r); });
}

std::vector<ner::MaskedArticle> read_masked(const std::filesystem::path& path) {
  return read_jsonl<ner::MaskedArticle>(
      path, [](const nlohmann::json& j) { return ner::masked_from_json(j); });
}

void write_hits(const std::filesystem::path& path, std::span<const std::string> query_ids,
                std::span<const std::vector<index::SearchHit>> hits) {
  if (query_ids.size() != hits.size()) {
    throw ShapeError(std::to_string(query_ids.size()) + " query ids for " +
                     std::to_string(hits.size()) + " hit lists");
  }
  std::vector<HitRow> rows;
  for (std::size_t q = 0; q < hits.size(); ++q) {
    for (std::size_t r = 0; r < hits[q].size(); ++r) {
      rows.push_back({query_ids[q], r + 1, hits[q][r].id, hits[q][r].score});
    }
  }
  write_jsonl(path, rows, [](const HitRow& h) {
    return nlohmann::json{{"query_id", h.query_id}, {"rank", h.rank}, {"id", h.id}, {"score", h.score}};
  });
}

std::vector<HitRow> read_hits(const std::filesystem::path& path) {
  return read_jsonl<HitRow>(path, [](const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("query_id") || !j.contains("rank") || !j.contains("id") ||
        !j.contains("score")) {
      throw MissingField("hit row needs query_id, rank, id, score");
    }
    return HitRow{j["query_id"].get<std::string>(), j["rank"].get<std::size_t>(),
                  j["id"].get<std::string>(), j["score"].get<float>()};
  });
}

}  // namespace ndv::pipeline
