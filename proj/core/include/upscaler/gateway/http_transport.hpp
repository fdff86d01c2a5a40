#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>

namespace upscaler::gateway {

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Minimal blocking HTTP client surface used by the gateway. Implementations
// throw transport-error when no response arrives (refused, reset, timed out).
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post_json(const std::string& path, const std::string& body) = 0;
  virtual HttpResponse get(const std::string& path) = 0;
};

using TransportFactory = std::function<std::unique_ptr<Transport>(const std::string& endpoint)>;

/// Plain-HTTP transport for endpoints of the form http://host:port.
std::unique_ptr<Transport> make_http_transport(const std::string& endpoint,
                                               std::chrono::milliseconds timeout = std::chrono::seconds(120));

}  // namespace upscaler::gateway
