#include <doctest.h>

#include <atomic>
#include <random>

#include "live_server.hpp"
#include "ndv/common/error.hpp"
#include "ndv/service/service.hpp"
#include "toy_corpus.hpp"

using namespace ndv;
using nlohmann::json;

namespace {

http::RetryPolicy fast_policy(int attempts = 2) {
  http::RetryPolicy p;
  p.attempts = attempts;
  p.backoff = std::chrono::milliseconds(1);
  p.timeout = std::chrono::seconds(2);
  return p;
}

std::vector<std::string> sample_texts() {
  std::mt19937 rng(31);
  std::vector<std::string> texts;
  for (const auto& a : oracle::random_articles(rng, 12, "r")) texts.push_back(a.text);
  texts.push_back("Crowds in São Paulo cheered Mr. O'Neil's return.");
  return texts;
}

}  // namespace

TEST_CASE("stub backends served over HTTP match the local stubs") {
  oracle::LiveServer live([](httplib::Server& s) { service::mount_stub_backends(s, 64); });
  const auto texts = sample_texts();

  const ner::RemoteNerBackend remote_ner(http::parse_endpoint(live.url("/ner")), fast_policy());
  CHECK(ner::annotate(remote_ner, texts) == ner::StubNerBackend().annotate(texts));

  const embed::RemoteEmbeddingBackend remote_embed(http::parse_endpoint(live.url("/embed")),
                                                   "same-story", fast_policy());
  const auto got = embed::embed_batch(remote_embed, texts);
  const auto want = embed::embed_batch(embed::StubEmbeddingBackend(64), texts);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].values == want[i].values);
  CHECK(remote_embed.dim() == std::optional<std::size_t>(64));

  pipeline::PipelineConfig c;
  c.ner_backend = live.url("/ner");
  c.embed_backend = live.url("/embed");
  c.ner_batch = 4;
  pipeline::PipelineConfig local;
  local.stub_dim = 64;
  std::mt19937 rng(8);
  const auto articles = oracle::random_articles(rng, 10, "p");
  CHECK(pipeline::Pipeline(c).mask_and_embed(articles) ==
        pipeline::Pipeline(local).mask_and_embed(articles));
}

TEST_CASE("unreachable backends raise BackendUnavailable") {
  const ner::RemoteNerBackend dead(http::parse_endpoint("http://127.0.0.1:9/ner"), fast_policy());
  const std::vector<std::string> texts = {"Hello there"};
  CHECK_THROWS_AS(dead.annotate(texts), BackendUnavailable);
}

TEST_CASE("server errors are retried, client errors are not") {
  std::atomic<int> calls{0};
  oracle::LiveServer live([&](httplib::Server& s) {
    s.Post("/500", [&](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.status = 500;
    });
    s.Post("/400", [&](const httplib::Request&, httplib::Response& res) {
      ++calls;
      res.status = 400;
    });
    s.Post("/garbage", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("not json", "application/json");
    });
  });
  const json body = {{"texts", json::array({"a"})}};
  CHECK_THROWS_AS(http::post_json(http::parse_endpoint(live.url("/500")), body, fast_policy(3)),
                  BackendUnavailable);
  CHECK(calls == 3);
  calls = 0;
  CHECK_THROWS_AS(http::post_json(http::parse_endpoint(live.url("/400")), body, fast_policy(3)),
                  ProtocolError);
  CHECK(calls == 1);
  CHECK_THROWS_AS(http::post_json(http::parse_endpoint(live.url("/garbage")), body, fast_policy()),
                  ProtocolError);
}

TEST_CASE("malformed NER replies are protocol errors") {
  oracle::LiveServer live([](httplib::Server& s) {
    s.Post("/past-end", [](const httplib::Request&, httplib::Response& res) {
      const json reply = {{"annotations", {{{{"token", "Hi"}, {"start", 0}, {"end", 40}, {"tag", "O"}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    s.Post("/bad-tag", [](const httplib::Request&, httplib::Response& res) {
      const json reply = {{"annotations", {{{{"token", "Hi"}, {"start", 0}, {"end", 2}, {"tag", "Q-X"}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    s.Post("/short", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"annotations": []})", "application/json");
    });
  });
  const std::vector<std::string> texts = {"Hi"};
  for (const char* path : {"/past-end", "/bad-tag", "/short"}) {
    CAPTURE(path);
    const ner::RemoteNerBackend b(http::parse_endpoint(live.url(path)), fast_policy());
    CHECK_THROWS_AS(ner::annotate(b, texts), ProtocolError);
  }
}

TEST_CASE("service reports a down backend as 503 with the stage") {
  std::mt19937 rng(3);
  const auto articles = oracle::random_articles(rng, 5, "d");
  const pipeline::Pipeline local(pipeline::PipelineConfig{});
  auto idx = index::FlatIndex::build({local.mask_and_embed(articles)});

  pipeline::PipelineConfig c;
  c.ner_backend = "http://127.0.0.1:9/ner";
  c.retry = fast_policy(1);
  service::SearchService svc{pipeline::Pipeline(c)};
  svc.load(std::move(idx), articles);
  const auto r = svc.search(R"({"text": "Storm hits Iowa"})");
  CHECK(r.status == 503);
  CHECK(r.body.at("stage") == "ner");
  // Unmasked queries skip the tagger entirely.
  CHECK(svc.search(R"({"text": "Storm hits Iowa", "mask": false})").status == 200);
}
