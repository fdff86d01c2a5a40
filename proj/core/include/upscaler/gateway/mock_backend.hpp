#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "upscaler/gateway/wire.hpp"

namespace upscaler::gateway {

/// Deterministic stand-in for a diffusion backend. Image i is the source image
/// (resized to width x height) blended toward seeded uniform noise with weight
/// w = strength or conditioning_scale, then unsharp-masked by 0.5 * w. The noise
/// stream depends on the seed, i and every non-image request field. At w = 0 the
/// source comes back unchanged. Throws request-error on a malformed request and
/// decode-error when the image does not decode.
InferenceResponse mock_infer(const InferenceRequest& request);

/// Synthetic GPU sample number `tick`: memory in [18,46] GB, temperature in
/// [40,85] C, power in [80,300] W.
nlohmann::json mock_metrics(std::uint64_t tick);

struct FaultPlan {
  int fail_next = 0;         // answer the next N infer calls with fail_status
  int fail_status = 500;
  int drop_images = 0;       // return this many fewer images than asked (persistent)
  bool fail_metrics = false;  // metrics endpoint answers 503
  std::chrono::milliseconds delay{0};
};

// mock_infer behind the wire protocol, on 127.0.0.1 and an ephemeral port.
class MockBackendServer {
 public:
  MockBackendServer();
  ~MockBackendServer();
  MockBackendServer(const MockBackendServer&) = delete;
  MockBackendServer& operator=(const MockBackendServer&) = delete;

  /// Binds and starts serving on a background thread. Throws io-error if binding fails.
  void start();
  void stop();
  int port() const noexcept;
  std::string endpoint() const;

  void set_faults(const FaultPlan& plan);
  std::uint64_t infer_calls() const;
  /// Every successfully parsed request, in arrival order.
  std::vector<InferenceRequest> received() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// In-process client that calls mock_infer directly and records requests.
class MockClient final : public InferenceClient {
 public:
  InferenceResult infer(const InferenceRequest& request) override;
  std::vector<InferenceRequest> received() const;
  /// Makes the next N calls for requests carrying (or lacking) a LoRA fail with transport-error.
  void fail_lora_branch(int n) { std::lock_guard l(mu_); fail_lora_ = n; }
  void fail_plain_branch(int n) { std::lock_guard l(mu_); fail_plain_ = n; }

 private:
  mutable std::mutex mu_;
  std::vector<InferenceRequest> received_;
  int fail_lora_ = 0;
  int fail_plain_ = 0;
};

}  // namespace upscaler::gateway
