#pragma once

#include <chrono>
#include <string>
#include <string_view>

#include <json.hpp>

namespace ndv::http {

// "http://host[:port][/path]". https is not supported.
struct Endpoint {
  std::string host;
  int port = 80;
  std::string path = "/";

  std::string str() const;
};

// Throws ndv::Error on a malformed or non-http URL.
Endpoint parse_endpoint(std::string_view url);

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds backoff{100};  // doubled after each failure
  std::chrono::seconds timeout{30};
};

// POSTs a JSON body and parses the JSON reply. Connection failures and 5xx
// replies are retried per policy, then surface as BackendUnavailable. 4xx
// replies and unparseable bodies raise ProtocolError.
nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body,
                         const RetryPolicy& policy);

}  // namespace ndv::http
