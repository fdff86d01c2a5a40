#include "upscaler/gateway/admission.hpp"

#include "upscaler/error.hpp"

namespace upscaler::gateway {

using nlohmann::json;

std::string_view to_string(Capability c) noexcept {
  switch (c) {
    case Capability::img2img: return "img2img";
    case Capability::controlnet: return "controlnet";
    case Capability::lora: return "lora";
  }
  return "unknown";
}

std::string_view to_string(Health h) noexcept {
  switch (h) {
    case Health::up: return "up";
    case Health::degraded: return "degraded";
    case Health::down: return "down";
  }
  return "unknown";
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::admit: return "admit";
    case Verdict::queue: return "queue";
    case Verdict::reject: return "reject";
  }
  return "unknown";
}

void validate(const BackendDescriptor& b) {
  std::vector<std::string> problems;
  if (b.id.empty()) problems.push_back("id: must not be empty");
  if (b.endpoint.empty()) problems.push_back("endpoint: must not be empty");
  if (!(b.declared_vram_gb > 0.0)) problems.push_back("declared_vram_gb: must be > 0");
  if (b.max_in_flight < 1) problems.push_back("max_in_flight: must be >= 1");
  if (!problems.empty()) throw_error(ErrorCode::config_error, "invalid backend '" + b.id + "'", problems);
}

void validate(const VramModel& m) {
  std::vector<std::string> problems;
  if (!(m.base_img2img_gb > 0.0)) problems.push_back("base_img2img_gb: must be > 0");
  if (!(m.controlnet_overhead_gb >= 0.0)) problems.push_back("controlnet_overhead_gb: must be >= 0");
  if (!(m.stage2_total_gb >= m.base_img2img_gb)) problems.push_back("stage2_total_gb: must be >= base_img2img_gb");
  if (!problems.empty()) throw_error(ErrorCode::config_error, "invalid VRAM model", problems);
}

double required_vram_gb(RequestKind kind, const VramModel& model) noexcept {
  return kind == RequestKind::img2img ? model.base_img2img_gb : model.stage2_total_gb;
}

AdmissionDecision admission_check(RequestKind kind, bool wants_lora, const BackendDescriptor& backend, int in_flight,
                                  const VramModel& model) {
  const auto cap = kind == RequestKind::img2img ? Capability::img2img : Capability::controlnet;
  if (!backend.capabilities.count(cap)) {
    return {Verdict::reject, "backend '" + backend.id + "' lacks the " + std::string(to_string(cap)) + " capability"};
  }
  if (wants_lora && !backend.capabilities.count(Capability::lora)) {
    return {Verdict::reject, "backend '" + backend.id + "' cannot attach LoRA weights"};
  }
  const double need = required_vram_gb(kind, model);
  if (need > backend.declared_vram_gb) {
    return {Verdict::reject, std::string(to_string(kind)) + " needs " + json(need).dump() + " GB, backend '" +
                                 backend.id + "' declares " + json(backend.declared_vram_gb).dump() + " GB"};
  }
  if (backend.health == Health::down) return {Verdict::reject, "backend '" + backend.id + "' is down"};
  if (in_flight >= backend.max_in_flight) {
    return {Verdict::queue, "backend '" + backend.id + "' is at max_in_flight"};
  }
  return {Verdict::admit, {}};
}

json to_json(const BackendDescriptor& b) {
  json caps = json::array();
  for (auto c : b.capabilities) caps.push_back(to_string(c));
  return {{"id", b.id},
          {"endpoint", b.endpoint},
          {"declared_vram_gb", b.declared_vram_gb},
          {"capabilities", caps},
          {"max_in_flight", b.max_in_flight},
          {"health", to_string(b.health)}};
}

BackendDescriptor backend_from_json(const json& doc) {
  BackendDescriptor b;
  try {
    b.id = doc.at("id").get<std::string>();
    b.endpoint = doc.at("endpoint").get<std::string>();
    b.declared_vram_gb = doc.at("declared_vram_gb").get<double>();
    b.max_in_flight = doc.value("max_in_flight", 1);
    const auto caps = doc.value("capabilities", std::vector<std::string>{"img2img", "controlnet", "lora"});
    for (const auto& c : caps) {
      if (c == "img2img") {
        b.capabilities.insert(Capability::img2img);
      } else if (c == "controlnet") {
        b.capabilities.insert(Capability::controlnet);
      } else if (c == "lora") {
        b.capabilities.insert(Capability::lora);
      } else {
        throw_error(ErrorCode::config_error, "unknown capability '" + c + "'");
      }
    }
    const auto health = doc.value("health", std::string("up"));
    if (health == "up") {
      b.health = Health::up;
    } else if (health == "degraded") {
      b.health = Health::degraded;
    } else if (health == "down") {
      b.health = Health::down;
    } else {
      throw_error(ErrorCode::config_error, "unknown health '" + health + "'");
    }
  } catch (const json::exception& e) {
    throw_error(ErrorCode::config_error, std::string("malformed backend descriptor: ") + e.what());
  }
  validate(b);
  return b;
}

json to_json(const VramModel& m) {
  return {{"base_img2img_gb", m.base_img2img_gb},
          {"controlnet_overhead_gb", m.controlnet_overhead_gb},
          {"stage2_total_gb", m.stage2_total_gb}};
}

VramModel vram_model_from_json(const json& doc) {
  VramModel m;
  try {
    m.base_img2img_gb = doc.value("base_img2img_gb", m.base_img2img_gb);
    m.controlnet_overhead_gb = doc.value("controlnet_overhead_gb", m.controlnet_overhead_gb);
    m.stage2_total_gb = doc.value("stage2_total_gb", m.stage2_total_gb);
  } catch (const json::exception& e) {
    throw_error(ErrorCode::config_error, std::string("malformed vram model: ") + e.what());
  }
  validate(m);
  return m;
}

}  // namespace upscaler::gateway
