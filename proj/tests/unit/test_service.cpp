#include <doctest.h>

#include <random>

#include "live_server.hpp"
#include "ndv/common/error.hpp"
#include "ndv/common/utf8.hpp"
#include "ndv/service/service.hpp"
#include "toy_corpus.hpp"

using namespace ndv;
using namespace ndv::service;
using nlohmann::json;

namespace {

struct Loaded {
  std::vector<corpus::Article> articles;
  std::unique_ptr<SearchService> service;
};

Loaded loaded_service(std::size_t n, unsigned seed = 5) {
  std::mt19937 rng(seed);
  Loaded out;
  out.articles = oracle::random_articles(rng, n, "art/");
  const pipeline::Pipeline p(pipeline::PipelineConfig{});
  auto idx = index::FlatIndex::build({p.mask_and_embed(out.articles)});
  out.service = std::make_unique<SearchService>(p);
  out.service->load(std::move(idx), out.articles);
  return out;
}

json without_timing(json body) {
  body.erase("timing_ms");
  return body;
}

}  // namespace

TEST_CASE("endpoints answer 503 before load") {
  const SearchService svc(pipeline::Pipeline(pipeline::PipelineConfig{}));
  CHECK_FALSE(svc.ready());
  CHECK(svc.health().status == 503);
  CHECK(svc.health().body.at("status") == "loading");
  CHECK(svc.search(R"({"text": "x"})").status == 503);
  CHECK(svc.article("a").status == 503);
}

TEST_CASE("health after load") {
  auto l = loaded_service(8);
  const auto h = l.service->health();
  CHECK(h.status == 200);
  CHECK(h.body == json{{"status", "ok"}, {"index_total", 8}, {"dim", 256}});
  CHECK_THROWS_AS(l.service->load(index::FlatIndex::build({embed::EmbeddingStore::from_rows(
                                      2, {1, 0}, {"z"})}),
                                  {}),
                  ndv::Error);
}

TEST_CASE("search validation") {
  auto l = loaded_service(8);
  const auto& svc = *l.service;
  for (const char* body :
       {"not json", "[1]", "{}", R"({"text": 3})", R"({"text": "   "})", R"({"text": "a", "k": 0})",
        R"({"text": "a", "k": 51})", R"({"text": "a", "k": 2.5})", R"({"text": "a", "k": "3"})",
        R"({"text": "a", "mask": "yes"})"}) {
    CAPTURE(body);
    const auto r = svc.search(body);
    CHECK(r.status == 400);
    CHECK(r.body.contains("error"));
  }
  CHECK(svc.search(R"({"text": "a", "k": 50})").status == 200);
}

TEST_CASE("search returns the article itself first") {
  auto l = loaded_service(8);
  for (const auto& a : l.articles) {
    const auto r = l.service->search(json{{"text", a.text}, {"k", 3}}.dump());
    REQUIRE(r.status == 200);
    const auto& hits = r.body.at("hits");
    REQUIRE(hits.size() == 3);
    CHECK(hits[0].at("id") == a.id);
    CHECK(hits[0].at("score").get<double>() == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(hits[0].at("headline") == *a.headline);
    CHECK(hits[0].at("date") == a.date);
    CHECK(hits[0].at("source") == a.source);
    CHECK(hits[0].at("snippet") == utf8::prefix(a.text, kSnippetChars));
    CHECK(r.body.at("timing_ms").is_number_integer());
    CHECK(r.body.at("masked_query").get<std::string>().find("[MASK]") != std::string::npos);
  }
}

TEST_CASE("search is deterministic and agrees with the pipeline") {
  auto l = loaded_service(30);
  const std::string text = "the farmers voted against the railroad rates said John Smith";
  const auto body = json{{"text", text}, {"k", 7}}.dump();
  const auto a = l.service->search(body);
  const auto b = l.service->search(body);
  CHECK(without_timing(a.body) == without_timing(b.body));

  const pipeline::Pipeline p(pipeline::PipelineConfig{});
  const std::vector<corpus::Article> q = {{"query", "query", "1970-01-01", text, {}}};
  const auto want = p.search_nearest_story(q, p.mask_and_embed(l.articles), 7).front();
  REQUIRE(a.body.at("hits").size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(a.body["hits"][i]["id"] == want[i].id);
    CHECK(a.body["hits"][i]["score"].get<float>() == want[i].score);
  }
  CHECK(l.service->search(json{{"text", text}}.dump()).body.at("hits").size() == kDefaultK);

  const auto raw = l.service->search(json{{"text", text}, {"mask", false}}.dump());
  CHECK(raw.body.at("masked_query") == text);
}

TEST_CASE("article lookup") {
  auto l = loaded_service(4);
  const auto r = l.service->article(l.articles[2].id);
  CHECK(r.status == 200);
  CHECK(r.body.at("text") == l.articles[2].text);
  CHECK(r.body.at("id") == l.articles[2].id);
  CHECK(l.service->article("nope").status == 404);
}

TEST_CASE("endpoints over HTTP with escaped ids and CORS") {
  auto l = loaded_service(6);
  oracle::LiveServer live([&](httplib::Server& s) { l.service->mount(s); });
  httplib::Client client("127.0.0.1", live.port);

  auto h = client.Get("/health");
  REQUIRE(h);
  CHECK(h->status == 200);
  CHECK(h->get_header_value("Access-Control-Allow-Origin") == "*");

  // Ids contain a slash, which must arrive escaped.
  const auto& id = l.articles[3].id;
  auto a = client.Get("/article/art%2F" + id.substr(4));
  REQUIRE(a);
  CHECK(a->status == 200);
  CHECK(json::parse(a->body).at("id") == id);

  auto s = client.Post("/search", json{{"text", l.articles[0].text}, {"k", 2}}.dump(),
                       "application/json");
  REQUIRE(s);
  CHECK(s->status == 200);
  CHECK(json::parse(s->body).at("hits")[0].at("id") == l.articles[0].id);

  auto bad = client.Post("/search", "{}", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);

  auto pre = client.Options("/search");
  REQUIRE(pre);
  CHECK(pre->status == 204);
  CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("POST") != std::string::npos);
}
