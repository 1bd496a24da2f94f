#include <doctest.h>

#include <fstream>
#include <random>

#include "ndv/common/error.hpp"
#include "ndv/embed/backend.hpp"
#include "ndv/nermask/bio.hpp"
#include "ndv/nermask/mask.hpp"
#include "ndv/pipeline/pipeline.hpp"
#include "oracles.hpp"
#include "toy_corpus.hpp"

using namespace ndv;
using namespace ndv::pipeline;
using corpus::Article;
using embed::EmbeddingStore;

namespace {

// The four stages chained by hand from the module-level operations.
EmbeddingStore manual_store(const std::vector<Article>& articles, std::size_t dim = embed::kStubDim) {
  const ner::StubNerBackend tagger;
  const embed::StubEmbeddingBackend embedder(dim);
  std::vector<std::string> texts, ids, masked;
  for (const auto& a : articles) {
    texts.push_back(a.text);
    ids.push_back(a.id);
  }
  const auto tags = ner::annotate(tagger, texts);
  for (std::size_t i = 0; i < articles.size(); ++i) {
    const auto spans = ner::decode_bio(tags[i]);
    masked.push_back(ner::mask_spans(articles[i].text, spans, articles[i].id).masked_text);
  }
  return EmbeddingStore::from_vectors(dim, embed::embed_batch(embedder, masked), ids);
}

class FailingNer final : public ner::NerBackend {
 public:
  ner::AnnotationBatch annotate(std::span<const std::string>) const override {
    throw BackendUnavailable("connection refused");
  }
  std::string describe() const override { return "down"; }
};

// Stub embedder that returns the zero vector for texts containing "zzpoison".
class PoisonEmbedder final : public embed::EmbeddingBackend {
 public:
  embed::RawBatch encode(std::span<const std::string> texts) const override {
    auto out = inner_.encode(texts);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (texts[i].find("zzpoison") != std::string::npos) std::fill(out[i].begin(), out[i].end(), 0.0f);
    }
    return out;
  }
  std::optional<std::size_t> dim() const override { return inner_.dim(); }
  std::string describe() const override { return "poison"; }

 private:
  embed::StubEmbeddingBackend inner_;
};

}  // namespace

TEST_CASE("config validation") {
  PipelineConfig c;
  CHECK_NOTHROW(c.validate());
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), BadK);
  c = {};
  c.embed_batch = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.ner_batch = 0;
  CHECK_THROWS_AS(Pipeline{c}, Error);
}

TEST_CASE("mask_and_embed equals the manual composition") {
  std::mt19937 rng(42);
  const auto articles = oracle::random_articles(rng, 37, "m");
  for (unsigned workers : {1u, 4u}) {
    PipelineConfig c;
    c.workers = workers;
    c.ner_batch = 5;
    c.embed_batch = 7;
    const Pipeline p(c);
    const auto fused = p.mask_and_embed(articles);
    CHECK(fused == manual_store(articles));
    const auto staged = p.embed(Pipeline::mask(p.ner(articles)));
    CHECK(staged == fused);
  }
}

TEST_CASE("empty corpus and entity-only text") {
  const Pipeline p(PipelineConfig{});
  const auto empty = p.mask_and_embed({});
  CHECK(empty.count() == 0);
  CHECK(empty.dim() == embed::kStubDim);

  const std::vector<Article> one = {{"e", "s", "1900-01-01", "Paris", {}}};
  const auto masked = Pipeline::mask(p.ner(one));
  CHECK(masked[0].masked_text == "[MASK]");
  const embed::StubEmbeddingBackend stub;
  const auto expect = embed::embed_batch(stub, std::vector<std::string>{"[MASK]"});
  const auto got = p.mask_and_embed(one);
  CHECK(std::vector<float>(got.row(0).begin(), got.row(0).end()) == expect[0].values);
}

TEST_CASE("search_nearest_story") {
  std::mt19937 rng(9);
  const auto corpus_articles = oracle::random_articles(rng, 50, "c");
  const Pipeline p(PipelineConfig{});
  const auto corpus_store = p.mask_and_embed(corpus_articles);

  SUBCASE("self retrieval") {
    const auto hits = p.search_nearest_story(corpus_articles, corpus_store, 1);
    for (std::size_t i = 0; i < corpus_articles.size(); ++i) {
      REQUIRE(hits[i].size() == 1);
      CHECK(hits[i][0].id == corpus_articles[i].id);
      CHECK(hits[i][0].score == doctest::Approx(1.0).epsilon(1e-5));
    }
  }
  SUBCASE("equals manual composition") {
    const auto queries = oracle::random_articles(rng, 5, "q");
    const auto got = p.search_nearest_story(queries, corpus_store, 4);
    const auto index = index::FlatIndex::build({manual_store(corpus_articles)});
    const auto want = index.search_batch(manual_store(queries), 4);
    CHECK(got == want);
  }
  SUBCASE("k=1 on two articles") {
    const std::vector<Article> two(corpus_articles.begin(), corpus_articles.begin() + 2);
    const auto hits = p.search_nearest_story(two, p.mask_and_embed(two), 1);
    CHECK(hits.size() == 2);
    CHECK(hits[0].size() == 1);
  }
  SUBCASE("dim mismatch is a search-stage error") {
    PipelineConfig c;
    c.stub_dim = 32;
    const Pipeline narrow(c);
    try {
      narrow.search_nearest_story(corpus_articles, corpus_store, 1);
      FAIL("expected StageError");
    } catch (const StageError& e) {
      CHECK(e.stage() == "search");
    }
  }
}

TEST_CASE("stage errors name the stage and the article") {
  std::mt19937 rng(1);
  auto articles = oracle::random_articles(rng, 9, "s");
  articles[6].text = "lowercase zzpoison text only";
  PipelineConfig c;
  c.embed_batch = 4;
  const Pipeline poisoned(c, std::make_shared<ner::StubNerBackend>(),
                          std::make_shared<PoisonEmbedder>());
  try {
    poisoned.mask_and_embed(articles);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "embed");
    CHECK(e.article_id() == "s6");
    CHECK_FALSE(e.backend_down());
  }

  const Pipeline down(c, std::make_shared<FailingNer>(), std::make_shared<embed::StubEmbeddingBackend>());
  try {
    down.ner(articles);
    FAIL("expected StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "ner");
    CHECK(e.backend_down());
  }
}

TEST_CASE("find_nearest_neighbours") {
  const auto corpus_store = EmbeddingStore::from_rows(2, {1, 0, 0, 1}, {"x", "y"});
  const auto queries = EmbeddingStore::from_rows(2, {0, 1, 1, 0}, {"q0", "q1"});
  const auto nn = find_nearest_neighbours(queries, corpus_store, 1);
  CHECK(nn.ids == std::vector<std::vector<std::string>>{{"y"}, {"x"}});
  CHECK(nn.scores == std::vector<std::vector<float>>{{1.0f}, {1.0f}});

  const auto wide = EmbeddingStore::from_rows(3, {1, 0, 0}, {"w"});
  CHECK_THROWS_AS(find_nearest_neighbours(wide, corpus_store, 1), DimMismatchError);

  std::mt19937 rng(4);
  const auto a = EmbeddingStore::from_rows(8, oracle::unit_rows(rng, 30, 8), oracle::numbered_ids("a", 30));
  const auto q = EmbeddingStore::from_rows(8, oracle::unit_rows(rng, 6, 8), oracle::numbered_ids("q", 6));
  const auto lists = find_nearest_neighbours(q, a, 3);
  const auto direct = index::FlatIndex::build({a}).search_batch(q, 3);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t r = 0; r < 3; ++r) {
      CHECK(lists.ids[i][r] == direct[i][r].id);
      CHECK(lists.scores[i][r] == direct[i][r].score);
    }
  }
}

TEST_CASE("download resolves a spec against a manifest") {
  const auto m = corpus::load_manifest(std::string(NDV_TEST_DATA) + "/manifest/manifest.json");
  const auto r = download("American Stories:1900:Alabama", m);
  CHECK(r.articles.size() == 4);
  CHECK(r.stats.files_matched == 1);
  CHECK_THROWS_AS(download("other dataset", m), ManifestError);
}

TEST_CASE("stage files round-trip") {
  oracle::TempDir dir("pipe");
  std::mt19937 rng(2);
  const auto articles = oracle::random_articles(rng, 6, "f");
  const Pipeline p(PipelineConfig{});
  const auto annotated = p.ner(articles);
  write_annotated(dir / "ner.jsonl", annotated);
  const auto back = read_annotated(dir / "ner.jsonl");
  REQUIRE(back.size() == annotated.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].article == annotated[i].article);
    CHECK(back[i].annotations == annotated[i].annotations);
  }

  const auto masked = Pipeline::mask(back);
  write_masked(dir / "masked.jsonl", masked);
  const auto masked_back = read_masked(dir / "masked.jsonl");
  CHECK(p.embed(masked_back) == p.mask_and_embed(articles));

  const std::vector<std::string> qids = {"q1", "q2"};
  const std::vector<std::vector<index::SearchHit>> hits = {{{"a", 0, 0.5f}, {"b", 1, 0.25f}}, {}};
  write_hits(dir / "hits.jsonl", qids, hits);
  const auto rows = read_hits(dir / "hits.jsonl");
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].query_id == "q1");
  CHECK(rows[1].rank == 2);
  CHECK(rows[1].id == "b");
  CHECK(rows[1].score == 0.25f);

  std::ofstream(dir / "broken.jsonl") << "{\"id\": 1}\n";
  CHECK_THROWS_AS(read_masked(dir / "broken.jsonl"), RecordError);
}

TEST_CASE("pipeline is deterministic across runs") {
  std::mt19937 rng(77);
  const auto articles = oracle::random_articles(rng, 20, "d");
  const auto a = Pipeline(PipelineConfig{}).mask_and_embed(articles);
  const auto b = Pipeline(PipelineConfig{}).mask_and_embed(articles);
  CHECK(a == b);
}
