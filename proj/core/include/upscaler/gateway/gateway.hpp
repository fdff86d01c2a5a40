#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "upscaler/gateway/admission.hpp"
#include "upscaler/gateway/http_transport.hpp"
#include "upscaler/gateway/telemetry.hpp"
#include "upscaler/gateway/wire.hpp"

namespace upscaler::gateway {

struct GatewayOptions {
  VramModel vram;
  int retries = 2;  // extra attempts after the first, on transport errors and 5xx
  std::chrono::milliseconds backoff{50};  // doubled before every retry
  std::chrono::milliseconds timeout{120000};
  std::chrono::milliseconds queue_timeout{600000};
  int failure_threshold = 3;  // consecutive failed polls before health -> degraded
  std::size_t telemetry_capacity = 1000;
  TransportFactory transport;  // defaults to make_http_transport
};

struct BackendStatus {
  BackendDescriptor descriptor;
  int in_flight = 0;
  int peak_in_flight = 0;
  std::uint64_t telemetry_gaps = 0;
  std::optional<GpuSample> latest;
};

nlohmann::json to_json(const BackendStatus& status);

// Routes inference requests to registered backends behind a per-backend
// admission gate. Safe for concurrent use.
class Gateway final : public InferenceClient {
 public:
  explicit Gateway(GatewayOptions options = {});
  ~Gateway() override;
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Throws config-error on an invalid or duplicate descriptor.
  void add_backend(BackendDescriptor backend);

  std::vector<BackendStatus> backends() const;
  /// Throws not-found.
  BackendStatus backend(const std::string& id) const;

  /// Current verdict for `request` on `backend_id`. Throws not-found.
  AdmissionDecision check(const InferenceRequest& request, const std::string& backend_id) const;

  /// Waits while queued, then POSTs with bounded retry. Throws admission-rejected,
  /// transport-error (health -> degraded), request-error (4xx) or protocol-error.
  InferenceResult submit(const InferenceRequest& request, const std::string& backend_id);

  /// submit() on the first backend (by id) that admits, else the first that queues.
  InferenceResult infer(const InferenceRequest& request) override;

  /// One telemetry poll. Returns false when it failed (gap recorded).
  bool poll_telemetry(const std::string& backend_id);
  std::vector<GpuSample> telemetry(const std::string& backend_id) const;
  void start_polling(std::chrono::milliseconds period);
  void stop_polling();

  const VramModel& vram_model() const noexcept { return options_.vram; }

 private:
  struct Slot;
  Slot& slot(const std::string& id) const;

  GatewayOptions options_;
  mutable std::mutex registry_mu_;
  std::map<std::string, std::unique_ptr<Slot>> slots_;

  std::mutex poll_mu_;
  std::condition_variable poll_cv_;
  bool polling_ = false;
  std::thread poller_;
};

}  // namespace upscaler::gateway
