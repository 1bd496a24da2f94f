#pragma once

#include <atomic>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ndv/corpus/corpus.hpp"
#include "ndv/index/flat_index.hpp"
#include "ndv/pipeline/pipeline.hpp"

namespace httplib {
class Server;
}

namespace ndv::service {

inline constexpr std::size_t kDefaultK = 5;
inline constexpr std::size_t kMaxK = 50;
inline constexpr std::size_t kSnippetChars = 300;

struct Response {
  int status = 200;
  nlohmann::json body;
};

// Read-only query service: POST /search, GET /article/{id}, GET /health.
//
// The index and corpus are installed once by load(); until then every
// endpoint answers 503. After load the state is immutable and handlers run
// concurrently without locking.
class SearchService {
 public:
  explicit SearchService(pipeline::Pipeline pipeline, std::string cors_origin = "*");
  ~SearchService();

  SearchService(const SearchService&) = delete;
  SearchService& operator=(const SearchService&) = delete;

  // Throws ndv::Error when called twice.
  void load(index::FlatIndex index, std::vector<corpus::Article> articles);
  bool ready() const noexcept { return state_.load(std::memory_order_acquire) != nullptr; }

  Response search(std::string_view request_body) const;
  Response article(std::string_view id) const;
  Response health() const;

  // Registers the endpoints (and CORS preflight) on an httplib server.
  void mount(httplib::Server& server) const;

 private:
  struct State;

  const pipeline::Pipeline pipeline_;
  const std::string cors_origin_;
  std::unique_ptr<State> owned_;
  std::atomic<const State*> state_{nullptr};
};

// Serves the stub NER and embedding backends over their wire protocols:
// POST {ner_path} and POST {embed_path}.
void mount_stub_backends(httplib::Server& server, std::size_t dim = 256,
                         std::string ner_path = "/ner", std::string embed_path = "/embed");

}  // namespace ndv::service
