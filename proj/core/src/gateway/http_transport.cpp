#include "upscaler/gateway/http_transport.hpp"

#include <httplib.h>

#include "upscaler/error.hpp"

namespace upscaler::gateway {

namespace {

class HttpTransport final : public Transport {
 public:
  HttpTransport(const std::string& endpoint, std::chrono::milliseconds timeout)
      : endpoint_(endpoint), client_(endpoint) {
    if (!client_.is_valid()) throw_error(ErrorCode::config_error, "unsupported endpoint '" + endpoint + "'");
    client_.set_connection_timeout(timeout);
    client_.set_read_timeout(timeout);
    client_.set_write_timeout(timeout);
  }

  HttpResponse post_json(const std::string& path, const std::string& body) override {
    auto res = client_.Post(path, body, "application/json");
    return unpack(res, "POST " + path);
  }

  HttpResponse get(const std::string& path) override {
    auto res = client_.Get(path);
    return unpack(res, "GET " + path);
  }

 private:
  HttpResponse unpack(const httplib::Result& res, const std::string& what) {
    if (!res) {
      throw_error(ErrorCode::transport_error, what + " to " + endpoint_ + " failed: " + httplib::to_string(res.error()));
    }
    return {res->status, res->body};
  }

  std::string endpoint_;
  httplib::Client client_;
};

}  // namespace

std::unique_ptr<Transport> make_http_transport(const std::string& endpoint, std::chrono::milliseconds timeout) {
  return std::make_unique<HttpTransport>(endpoint, timeout);
}

}  // namespace upscaler::gateway
