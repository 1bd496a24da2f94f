#include "ndv/common/http.hpp"

#include <charconv>
#include <thread>

#include <httplib.h>

#include "ndv/common/error.hpp"

namespace ndv::http {

std::string Endpoint::str() const {
  return "http://" + host + ":" + std::to_string(port) + path;
}

Endpoint parse_endpoint(std::string_view url) {
  constexpr std::string_view scheme = "http://";
  if (url.substr(0, scheme.size()) != scheme) {
    throw Error("backend URL '" + std::string(url) + "' must start with http://");
  }
  std::string_view rest = url.substr(scheme.size());
  Endpoint ep;
  const auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  if (slash != std::string_view::npos) ep.path = std::string(rest.substr(slash));
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    const auto port = authority.substr(colon + 1);
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), ep.port);
    if (ec != std::errc{} || ptr != port.data() + port.size() || ep.port <= 0 || ep.port > 65535) {
      throw Error("backend URL '" + std::string(url) + "' has a bad port");
    }
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw Error("backend URL '" + std::string(url) + "' has no host");
  ep.host = std::string(authority);
  return ep;
}

nlohmann::json post_json(const Endpoint& endpoint, const nlohmann::json& body,
                         const RetryPolicy& policy) {
  const std::string payload = body.dump();
  auto backoff = policy.backoff;
  std::string last_error;
  for (int attempt = 0; attempt < std::max(policy.attempts, 1); ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    httplib::Client client(endpoint.host, endpoint.port);
    client.set_connection_timeout(policy.timeout);
    client.set_read_timeout(policy.timeout);
    client.set_write_timeout(policy.timeout);
    auto res = client.Post(endpoint.path, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw ProtocolError(endpoint.str() + " replied HTTP " + std::to_string(res->status));
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(endpoint.str() + " replied with invalid JSON: " + e.what());
    }
  }
  throw BackendUnavailable(endpoint.str() + " unreachable after " +
                           std::to_string(std::max(policy.attempts, 1)) +
                           " attempt(s): " + last_error);
}

}  // namespace ndv::http
