#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace upscaler::pipeline {

enum class SeedMode { fixed, random };
enum class Branch { with_lora, without_lora };
enum class Stage { stage1, stage2 };

std::string_view to_string(SeedMode m) noexcept;
std::string_view to_string(Branch b) noexcept;
std::string_view to_string(Stage s) noexcept;
/// Throws invalid-argument on an unknown name.
Branch branch_from_string(std::string_view name);
Stage stage_from_string(std::string_view name);

using BranchSet = std::set<Branch>;

struct Stage1Config {
  double strength = 0.75;
  int num_inference_steps = 80;
  double guidance_scale = 3.5;
  int num_images = 3;
  SeedMode seed_mode = SeedMode::random;
  std::uint64_t seed = 5;  // used when seed_mode == fixed
  int target_side = 1024;
  bool archive_256 = false;  // also store a 256x256 standardization of the source
  std::string model_id = "black-forest-labs/FLUX.1-dev";
  double lora_scale = 0.9;  // with_lora branch only
};

struct Stage2Config {
  double conditioning_scale = 0.5;
  int num_inference_steps = 35;
  double guidance_scale = 3.5;
  int num_images = 3;
  SeedMode seed_mode = SeedMode::random;
  std::uint64_t seed = 5;
  double lora_scale = 0.9;
  std::string model_id = "jasperai/Flux.1-dev-Controlnet-Upscaler";
};

inline const BranchSet kDefaultStage1Branches{Branch::without_lora};
inline const BranchSet kDefaultStage2Branches{Branch::with_lora, Branch::without_lora};

/// floor(strength * steps), with a 1e-9 guard so decimal products such as
/// 0.29 * 100 are not pushed below their exact value by binary rounding.
/// Throws invalid-argument unless strength is in [0,1] and steps >= 1.
int effective_noise_steps(double strength, int num_inference_steps);

struct ConfigReport {
  std::vector<std::string> warnings;
  bool empty() const noexcept { return warnings.empty(); }
};

/// Recommended conditioning band and guidance window used for warnings.
inline constexpr double kConditioningLow = 0.5;
inline constexpr double kConditioningHigh = 0.65;
inline constexpr double kStrengthWarn = 0.8;
inline constexpr double kGuidanceLow = 2.0;
inline constexpr double kGuidanceHigh = 5.0;

/// Throws config-error on hard range violations; otherwise returns soft warnings.
ConfigReport validate_configs(const Stage1Config& stage1, const Stage2Config& stage2);

nlohmann::json to_json(const Stage1Config& c);
nlohmann::json to_json(const Stage2Config& c);
nlohmann::json to_json(const BranchSet& branches);
/// Missing keys keep their defaults. Throws config-error on malformed values.
Stage1Config stage1_from_json(const nlohmann::json& doc);
Stage2Config stage2_from_json(const nlohmann::json& doc);
BranchSet branches_from_json(const nlohmann::json& doc);

}  // namespace upscaler::pipeline
