#pragma once

#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "upscaler/gateway/wire.hpp"

namespace upscaler::gateway {

enum class Capability { img2img, controlnet, lora };
enum class Health { up, degraded, down };

std::string_view to_string(Capability c) noexcept;
std::string_view to_string(Health h) noexcept;

struct BackendDescriptor {
  std::string id;
  std::string endpoint;  // e.g. http://127.0.0.1:8188
  double declared_vram_gb = 0.0;
  std::set<Capability> capabilities;
  int max_in_flight = 1;
  Health health = Health::up;
};

/// Throws config-error unless declared_vram_gb > 0, max_in_flight >= 1 and id/endpoint are set.
void validate(const BackendDescriptor& backend);

// Static VRAM budgets. img2img needs the base minimum; a controlnet request
// needs the stage-2 total.
struct VramModel {
  double base_img2img_gb = 24.0;
  double controlnet_overhead_gb = 4.0;  // informational; admission uses stage2_total_gb
  double stage2_total_gb = 30.0;
};

void validate(const VramModel& model);

enum class Verdict { admit, queue, reject };
std::string_view to_string(Verdict v) noexcept;

struct AdmissionDecision {
  Verdict verdict = Verdict::reject;
  std::string reason;  // empty on admit
};

double required_vram_gb(RequestKind kind, const VramModel& model) noexcept;

/// Pure: reject on missing capability, insufficient declared VRAM or a down
/// backend; queue when in_flight >= max_in_flight; admit otherwise.
AdmissionDecision admission_check(RequestKind kind, bool wants_lora, const BackendDescriptor& backend, int in_flight,
                                  const VramModel& model);

nlohmann::json to_json(const BackendDescriptor& backend);
BackendDescriptor backend_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const VramModel& model);
VramModel vram_model_from_json(const nlohmann::json& doc);

}  // namespace upscaler::gateway
