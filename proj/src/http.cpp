#include "synthaudit/http.hpp"

#include <chrono>

#include <httplib.h>

#include "synthaudit/error.hpp"

namespace synthaudit {
namespace {

struct Endpoint {
  std::string origin;
  std::string prefix;
};

Endpoint split_url(const std::string& base_url) {
  const auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kConfig, "base URL needs a scheme: " + base_url);
  }
  if (base_url.compare(0, scheme_end, "http") != 0) {
    throw Error(ErrorCode::kConfig, "only http:// endpoints are supported: " +
                                        base_url);
  }
  const auto path_start = base_url.find('/', scheme_end + 3);
  Endpoint endpoint;
  endpoint.origin = base_url.substr(0, path_start);
  if (path_start != std::string::npos) {
    endpoint.prefix = base_url.substr(path_start);
    while (!endpoint.prefix.empty() && endpoint.prefix.back() == '/') {
      endpoint.prefix.pop_back();
    }
  }
  return endpoint;
}

}  // namespace

std::string post_json(const std::string& base_url, const std::string& path,
                      const std::string& body, double timeout_seconds) {
  const auto endpoint = split_url(base_url);
  httplib::Client client(endpoint.origin);
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);

  const auto url = endpoint.prefix + path;
  auto result = client.Post(url, body, "application/json");
  if (!result) {
    throw Error(ErrorCode::kEndpoint, "POST " + base_url + path + " failed: " +
                                          httplib::to_string(result.error()));
  }
  if (result->status < 200 || result->status >= 300) {
    throw Error(ErrorCode::kEndpoint, "POST " + base_url + path +
                                          " returned HTTP " +
                                          std::to_string(result->status));
  }
  return result->body;
}

}  // namespace synthaudit
