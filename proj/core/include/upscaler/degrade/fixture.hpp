#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "upscaler/degrade/degrade.hpp"

namespace upscaler::degrade {

enum class StepKind { gaussian_noise, poisson_noise, gaussian_blur, jpeg_artifacts, downsample };

std::string_view to_string(StepKind kind) noexcept;
std::optional<StepKind> step_kind_from_string(std::string_view name) noexcept;

// A step's parameter is drawn uniformly from [lo, hi] on every order; lo == hi
// pins it. Integer-valued parameters (jpeg quality, downsample factor) are drawn
// as integers.
struct ParamRange {
  double lo = 0.0;
  double hi = 0.0;

  static ParamRange fixed(double v) { return {v, v}; }
};

struct DegradationStep {
  StepKind kind = StepKind::gaussian_blur;
  ParamRange param;
  imaging::Kernel method = imaging::Kernel::lanczos;  // downsample only
};

struct DegradationSpec {
  std::vector<DegradationStep> steps;
  int orders = 1;
  std::uint64_t seed = 0;
};

struct RealizedStep {
  int order = 0;  // 1-based
  int index = 0;  // position in the step list
  StepKind kind = StepKind::gaussian_blur;
  double param = 0.0;
  std::uint64_t noise_seed = 0;  // meaningful for noise steps only
};

struct FixtureManifest {
  std::uint64_t seed = 0;
  int orders = 1;
  int input_width = 0;
  int input_height = 0;
  int output_width = 0;
  int output_height = 0;
  std::vector<RealizedStep> realized;
};

struct Fixture {
  ImageBuffer degraded;
  FixtureManifest manifest;
};

/// Throws invalid-argument listing every out-of-range field.
void validate_spec(const DegradationSpec& spec);

/// Applies the step list `orders` times. The parameters of step i on order k
/// come from sub-stream derive_seed(derive_seed(seed, k), i), so both passes are
/// independent yet reproducible. Ground truth must be at least 256x256.
Fixture synthesize_fixture(const ImageBuffer& ground_truth, const DegradationSpec& spec);

/// Blur, Gaussian and Poisson noise, JPEG artifacts, then a 4x downsample, applied
/// twice: a 1024x1024 ground truth becomes 64x64.
DegradationSpec second_order_spec(std::uint64_t seed);

/// Seeded stand-in for broadcast ground truth: a mown-stripe pitch with white
/// markings and a few kit-coloured figures carrying light number patches.
ImageBuffer synthetic_ground_truth(int side, std::uint64_t seed);

nlohmann::json to_json(const FixtureManifest& manifest);
nlohmann::json to_json(const DegradationSpec& spec);
/// Throws invalid-argument on unknown kinds or malformed fields.
DegradationSpec spec_from_json(const nlohmann::json& doc);

}  // namespace upscaler::degrade
