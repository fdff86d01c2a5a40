#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "upscaler/error.hpp"
#include "upscaler/gateway/gateway.hpp"
#include "upscaler/pipeline/engine.hpp"
#include "upscaler/service/config.hpp"

namespace upscaler::service {

/// HTTP status for an error code, and the matching {code, message, details} body.
int http_status(ErrorCode code) noexcept;
nlohmann::json error_json(const Error& e);

// The REST surface over the pipeline engine, gateway and stores. Construction
// opens the store and marks jobs left running by a previous process as failed
// ("interrupted", retryable).
class Server {
 public:
  /// Throws io-error when the store is unusable and config-error on bad backends.
  explicit Server(ServiceConfig config);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and serves on a background thread. Throws io-error when the port is taken.
  void start();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();
  /// Stops accepting requests, waits for in-flight stage runs, stops telemetry.
  void stop();

  int port() const noexcept;
  const std::vector<std::string>& warnings() const noexcept;
  /// Jobs marked interrupted during startup recovery.
  const std::vector<std::string>& recovered() const noexcept;

  pipeline::Engine& engine();
  gateway::Gateway& gateway();
  pipeline::BlobStore& blobs();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace upscaler::service
