#include "upscaler/pipeline/config.hpp"

#include <cmath>

#include "upscaler/error.hpp"

namespace upscaler::pipeline {

using nlohmann::json;

std::string_view to_string(SeedMode m) noexcept { return m == SeedMode::fixed ? "fixed" : "random"; }
std::string_view to_string(Branch b) noexcept { return b == Branch::with_lora ? "with_lora" : "without_lora"; }
std::string_view to_string(Stage s) noexcept { return s == Stage::stage1 ? "stage1" : "stage2"; }

Branch branch_from_string(std::string_view name) {
  if (name == "with_lora") return Branch::with_lora;
  if (name == "without_lora") return Branch::without_lora;
  throw_error(ErrorCode::invalid_argument, "unknown branch '" + std::string(name) + "'");
}

Stage stage_from_string(std::string_view name) {
  if (name == "stage1") return Stage::stage1;
  if (name == "stage2") return Stage::stage2;
  throw_error(ErrorCode::invalid_argument, "unknown stage '" + std::string(name) + "'");
}

int effective_noise_steps(double strength, int num_inference_steps) {
  if (!(strength >= 0.0 && strength <= 1.0)) throw_error(ErrorCode::invalid_argument, "strength must be in [0,1]");
  if (num_inference_steps < 1) throw_error(ErrorCode::invalid_argument, "num_inference_steps must be >= 1");
  const double product = strength * static_cast<double>(num_inference_steps);
  return static_cast<int>(std::floor(product + 1e-9 * std::max(1.0, product)));
}

ConfigReport validate_configs(const Stage1Config& s1, const Stage2Config& s2) {
  std::vector<std::string> errors;
  ConfigReport report;
  auto unit = [&](double v, const char* field) {
    if (!(v >= 0.0 && v <= 1.0)) errors.push_back(std::string(field) + ": must be in [0,1]");
  };
  unit(s1.strength, "stage1.strength");
  unit(s1.lora_scale, "stage1.lora_scale");
  unit(s2.conditioning_scale, "stage2.conditioning_scale");
  unit(s2.lora_scale, "stage2.lora_scale");
  if (s1.num_inference_steps < 1) errors.push_back("stage1.num_inference_steps: must be >= 1");
  if (s2.num_inference_steps < 1) errors.push_back("stage2.num_inference_steps: must be >= 1");
  if (s1.num_images < 1) errors.push_back("stage1.num_images: must be >= 1");
  if (s2.num_images < 1) errors.push_back("stage2.num_images: must be >= 1");
  if (!(s1.guidance_scale > 0.0)) errors.push_back("stage1.guidance_scale: must be > 0");
  if (!(s2.guidance_scale > 0.0)) errors.push_back("stage2.guidance_scale: must be > 0");
  if (s1.target_side < 1) errors.push_back("stage1.target_side: must be >= 1");
  if (s1.model_id.empty()) errors.push_back("stage1.model_id: must not be empty");
  if (s2.model_id.empty()) errors.push_back("stage2.model_id: must not be empty");
  if (!errors.empty()) throw_error(ErrorCode::config_error, "invalid stage configuration", errors);

  if (s1.strength >= kStrengthWarn) {
    report.warnings.push_back("stage1.strength " + json(s1.strength).dump() +
                              " >= 0.8: output may deviate from the input structure");
  }
  if (s2.conditioning_scale < kConditioningLow || s2.conditioning_scale > kConditioningHigh) {
    report.warnings.push_back("stage2.conditioning_scale " + json(s2.conditioning_scale).dump() +
                              " outside the recommended band [0.5, 0.65]");
  }
  auto guidance = [&](double g, const char* field) {
    if (g < kGuidanceLow || g > kGuidanceHigh) {
      report.warnings.push_back(std::string(field) + " " + json(g).dump() + " is far from 3.5");
    }
  };
  guidance(s1.guidance_scale, "stage1.guidance_scale");
  guidance(s2.guidance_scale, "stage2.guidance_scale");
  if (s1.target_side != 1024) {
    report.warnings.push_back("stage1.target_side " + std::to_string(s1.target_side) +
                              " differs from the 1024 model resolution");
  }
  return report;
}

json to_json(const Stage1Config& c) {
  return {{"strength", c.strength},
          {"num_inference_steps", c.num_inference_steps},
          {"guidance_scale", c.guidance_scale},
          {"num_images", c.num_images},
          {"seed_mode", to_string(c.seed_mode)},
          {"seed", c.seed},
          {"target_side", c.target_side},
          {"archive_256", c.archive_256},
          {"model_id", c.model_id},
          {"lora_scale", c.lora_scale}};
}

json to_json(const Stage2Config& c) {
  return {{"conditioning_scale", c.conditioning_scale},
          {"num_inference_steps", c.num_inference_steps},
          {"guidance_scale", c.guidance_scale},
          {"num_images", c.num_images},
          {"seed_mode", to_string(c.seed_mode)},
          {"seed", c.seed},
          {"lora_scale", c.lora_scale},
          {"model_id", c.model_id}};
}

json to_json(const BranchSet& branches) {
  json out = json::array();
  for (auto b : branches) out.push_back(to_string(b));
  return out;
}

namespace {

template <class T>
void read(const json& doc, const char* key, T& field) {
  if (doc.contains(key) && !doc[key].is_null()) field = doc[key].get<T>();
}

SeedMode seed_mode(const json& doc, SeedMode fallback) {
  if (!doc.contains("seed_mode")) return fallback;
  const auto v = doc["seed_mode"].get<std::string>();
  if (v == "fixed") return SeedMode::fixed;
  if (v == "random") return SeedMode::random;
  throw_error(ErrorCode::config_error, "seed_mode: unknown value '" + v + "'");
}

}  // namespace

Stage1Config stage1_from_json(const json& doc) {
  Stage1Config c;
  if (doc.is_null()) return c;
  if (!doc.is_object()) throw_error(ErrorCode::config_error, "stage1 config must be an object");
  try {
    read(doc, "strength", c.strength);
    read(doc, "num_inference_steps", c.num_inference_steps);
    read(doc, "guidance_scale", c.guidance_scale);
    read(doc, "num_images", c.num_images);
    c.seed_mode = seed_mode(doc, c.seed_mode);
    read(doc, "seed", c.seed);
    read(doc, "target_side", c.target_side);
    read(doc, "archive_256", c.archive_256);
    read(doc, "model_id", c.model_id);
    read(doc, "lora_scale", c.lora_scale);
  } catch (const json::exception& e) {
    throw_error(ErrorCode::config_error, std::string("malformed stage1 config: ") + e.what());
  }
  return c;
}

Stage2Config stage2_from_json(const json& doc) {
  Stage2Config c;
  if (doc.is_null()) return c;
  if (!doc.is_object()) throw_error(ErrorCode::config_error, "stage2 config must be an object");
  try {
    read(doc, "conditioning_scale", c.conditioning_scale);
    read(doc, "num_inference_steps", c.num_inference_steps);
    read(doc, "guidance_scale", c.guidance_scale);
    read(doc, "num_images", c.num_images);
    c.seed_mode = seed_mode(doc, c.seed_mode);
    read(doc, "seed", c.seed);
    read(doc, "lora_scale", c.lora_scale);
    read(doc, "model_id", c.model_id);
  } catch (const json::exception& e) {
    throw_error(ErrorCode::config_error, std::string("malformed stage2 config: ") + e.what());
  }
  return c;
}

BranchSet branches_from_json(const json& doc) {
  if (!doc.is_array()) throw_error(ErrorCode::config_error, "branches must be an array");
  BranchSet out;
  for (const auto& b : doc) {
    if (!b.is_string()) throw_error(ErrorCode::config_error, "branch names must be strings");
    try {
      out.insert(branch_from_string(b.get<std::string>()));
    } catch (const Error& e) {
      throw_error(ErrorCode::config_error, e.what());
    }
  }
  if (out.empty()) throw_error(ErrorCode::config_error, "at least one branch is required");
  return out;
}

}  // namespace upscaler::pipeline
