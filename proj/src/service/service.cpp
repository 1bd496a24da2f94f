#include "ndv/service/service.hpp"

#include <chrono>
#include <utility>

#include <httplib.h>

#include "ndv/common/error.hpp"
#include "ndv/common/utf8.hpp"
#include "ndv/embed/backend.hpp"
#include "ndv/nermask/backend.hpp"

namespace ndv::service {

using nlohmann::json;

struct SearchService::State {
  index::FlatIndex index;
  std::vector<corpus::Article> articles;
  std::unordered_map<std::string, std::size_t> by_id;
};

namespace {

Response error_response(int status, std::string message, std::string stage = {}) {
  json body = {{"error", std::move(message)}};
  if (!stage.empty()) body["stage"] = std::move(stage);
  return {status, std::move(body)};
}

Response not_loaded() { return error_response(503, "index not loaded"); }

bool is_blank(std::string_view text) {
  for (std::size_t i = 0; i < text.size();) {
    if (!utf8::is_whitespace(utf8::decode_at(text, i))) return false;
    i += utf8::sequence_length(text, i);
  }
  return true;
}

json article_json(const corpus::Article& a) {
  json j = corpus::to_json(a);
  if (!a.headline) j["headline"] = nullptr;
  return j;
}

}  // namespace

SearchService::SearchService(pipeline::Pipeline pipeline, std::string cors_origin)
    : pipeline_(std::move(pipeline)), cors_origin_(std::move(cors_origin)) {}

SearchService::~SearchService() = default;

void SearchService::load(index::FlatIndex index, std::vector<corpus::Article> articles) {
  if (owned_) throw Error("search service is already loaded");
  auto state = std::make_unique<State>(State{std::move(index), std::move(articles), {}});
  for (std::size_t i = 0; i < state->articles.size(); ++i) {
    state->by_id.emplace(state->articles[i].id, i);
  }
  owned_ = std::move(state);
  state_.store(owned_.get(), std::memory_order_release);
}

Response SearchService::search(std::string_view request_body) const {
  const State* state = state_.load(std::memory_order_acquire);
  if (!state) return not_loaded();
  const auto started = std::chrono::steady_clock::now();

  json req = json::parse(request_body, nullptr, false);
  if (req.is_discarded() || !req.is_object()) return error_response(400, "body must be a JSON object");
  if (!req.contains("text") || !req["text"].is_string()) {
    return error_response(400, "'text' must be a string");
  }
  const std::string text = req["text"].get<std::string>();
  if (is_blank(text)) return error_response(400, "'text' must not be empty");

  std::size_t k = kDefaultK;
  if (req.contains("k")) {
    const json& jk = req["k"];
    if (!jk.is_number_integer()) return error_response(400, "'k' must be an integer");
    const auto v = jk.get<std::int64_t>();
    if (v < 1 || v > std::int64_t(kMaxK)) {
      return error_response(400, "'k' must be between 1 and " + std::to_string(kMaxK));
    }
    k = std::size_t(v);
  }
  bool mask = true;
  if (req.contains("mask")) {
    if (!req["mask"].is_boolean()) return error_response(400, "'mask' must be a boolean");
    mask = req["mask"].get<bool>();
  }

  const corpus::Article query{"query", "query", "1970-01-01", text, std::nullopt};
  std::string masked_query;
  std::vector<index::SearchHit> hits;
  try {
    std::vector<ner::MaskedArticle> masked;
    if (mask) {
      masked = pipeline::Pipeline::mask(pipeline_.ner(std::span(&query, 1)));
    } else {
      masked.push_back({query.id, query.text, 0, 0});
    }
    masked_query = masked.front().masked_text;
    const auto store = pipeline_.embed(masked);
    hits = state->index.search_batch(store, k).front();
  } catch (const StageError& e) {
    if (e.backend_down()) return error_response(503, e.what(), e.stage());
    return error_response(500, e.what(), e.stage());
  } catch (const std::exception& e) {
    return error_response(500, e.what(), "search");
  }

  json out_hits = json::array();
  for (const auto& h : hits) {
    json row = {{"id", h.id}, {"score", h.score}};
    const auto it = state->by_id.find(h.id);
    if (it != state->by_id.end()) {
      const auto& a = state->articles[it->second];
      row["headline"] = a.headline ? json(*a.headline) : json(nullptr);
      row["date"] = a.date;
      row["source"] = a.source;
      row["snippet"] = utf8::prefix(a.text, kSnippetChars);
    } else {
      row["headline"] = nullptr;
      row["date"] = nullptr;
      row["source"] = nullptr;
      row["snippet"] = nullptr;
    }
    out_hits.push_back(std::move(row));
  }
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - started)
                           .count();
  return {200, {{"hits", std::move(out_hits)},
                {"masked_query", masked_query},
                {"timing_ms", elapsed}}};
}

Response SearchService::article(std::string_view id) const {
  const State* state = state_.load(std::memory_order_acquire);
  if (!state) return not_loaded();
  const auto it = state->by_id.find(std::string(id));
  if (it == state->by_id.end()) return error_response(404, "no article '" + std::string(id) + "'");
  return {200, article_json(state->articles[it->second])};
}

Response SearchService::health() const {
  const State* state = state_.load(std::memory_order_acquire);
  if (!state) return {503, {{"status", "loading"}}};
  return {200, {{"status", "ok"}, {"index_total", state->index.total()}, {"dim", state->index.dim()}}};
}

void SearchService::mount(httplib::Server& server) const {
  const std::string origin = cors_origin_;
  const auto reply = [origin](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_content(r.body.dump(), "application/json");
  };
  server.Options(R"(/.*)", [origin](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
    res.set_header("Access-Control-Allow-Origin", origin);
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Max-Age", "600");
  });
  server.Post("/search", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, search(req.body));
  });
  // httplib decodes the path before matching, so ids may contain '/'.
  server.Get(R"(/article/(.+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, article(req.matches[1].str()));
  });
  server.Get("/health", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, health());
  });
}

void mount_stub_backends(httplib::Server& server, std::size_t dim, std::string ner_path,
                         std::string embed_path) {
  auto ner = std::make_shared<ner::StubNerBackend>();
  auto embedder = std::make_shared<embed::StubEmbeddingBackend>(dim);
  const auto texts_of = [](const httplib::Request& req, httplib::Response& res)
      -> std::optional<std::vector<std::string>> {
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object() || !body.contains("texts") ||
        !body["texts"].is_array()) {
      res.status = 400;
      res.set_content(json{{"error", "expected {\"texts\": [string]}"}}.dump(), "application/json");
      return std::nullopt;
    }
    std::vector<std::string> texts;
    for (const auto& t : body["texts"]) {
      if (!t.is_string()) {
        res.status = 400;
        res.set_content(json{{"error", "texts must be strings"}}.dump(), "application/json");
        return std::nullopt;
      }
      texts.push_back(t.get<std::string>());
    }
    return texts;
  };
  server.Post(ner_path, [ner, texts_of](const httplib::Request& req, httplib::Response& res) {
    const auto texts = texts_of(req, res);
    if (!texts) return;
    res.set_content(ner::annotations_to_json(ner->annotate(*texts)).dump(), "application/json");
  });
  server.Post(embed_path, [embedder, texts_of, dim](const httplib::Request& req,
                                                    httplib::Response& res) {
    const auto texts = texts_of(req, res);
    if (!texts) return;
    res.set_content(embed::vectors_to_json(dim, embedder->encode(*texts)).dump(),
                    "application/json");
  });
}

}  // namespace ndv::service
