#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "upscaler/hash.hpp"

namespace upscaler::gateway {

enum class RequestKind { img2img, controlnet };
std::string_view to_string(RequestKind kind) noexcept;

struct LoraAttachment {
  std::string name;
  double scale = 0.9;

  friend bool operator==(const LoraAttachment&, const LoraAttachment&) = default;
};

// One diffusion call. `image` is PNG bytes: the init image for img2img, the
// control image for controlnet. On the wire it travels base64-encoded under
// "init_image" or "control_image" respectively.
struct InferenceRequest {
  RequestKind kind = RequestKind::img2img;
  std::string model_id;
  std::string prompt;
  Bytes image;
  std::optional<double> strength;            // img2img only
  std::optional<double> conditioning_scale;  // controlnet only
  int num_inference_steps = 0;
  double guidance_scale = 0.0;
  std::uint64_t seed = 0;
  int num_images = 1;
  int width = 1024;
  int height = 1024;
  std::optional<LoraAttachment> lora;

  friend bool operator==(const InferenceRequest&, const InferenceRequest&) = default;
};

/// Structural problems ("field: message"); empty when the request is well formed.
std::vector<std::string> check(const InferenceRequest& request);

nlohmann::json to_json(const InferenceRequest& request);
/// Throws request-error on a malformed body.
InferenceRequest request_from_json(const nlohmann::json& doc);

/// Image-independent fields only, serialized canonically. Identifies the
/// request for deterministic test doubles.
std::string parameter_fingerprint(const InferenceRequest& request);

struct InferenceResponse {
  std::vector<Bytes> images;
  std::uint64_t seed_used = 0;
};

nlohmann::json to_json(const InferenceResponse& response);
/// Throws protocol-error on a malformed body.
InferenceResponse response_from_json(const nlohmann::json& doc);

// What a client hands back to the orchestrator: decoded, checked images with
// their content hashes.
struct InferenceResult {
  std::vector<Bytes> images;
  std::vector<std::string> hashes;  // sha256 of each image
  std::uint64_t seed_used = 0;
  double latency_ms = 0.0;
  std::string backend_id;
};

class InferenceClient {
 public:
  virtual ~InferenceClient() = default;
  virtual InferenceResult infer(const InferenceRequest& request) = 0;
};

/// Wire error body {code, message}.
nlohmann::json error_body(std::string_view code, std::string_view message);

inline constexpr const char* kInferPath = "/v1/infer";
inline constexpr const char* kMetricsPath = "/v1/metrics";

}  // namespace upscaler::gateway
