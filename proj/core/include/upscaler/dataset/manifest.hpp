#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "upscaler/dataset/captions.hpp"

namespace upscaler::dataset {

struct AugmentConfig {
  bool flip_aug = true;
  int num_repeats = 5;
  bool shuffle_caption = false;
};

struct ManifestRow {
  std::string image;
  int repeat = 0;  // 0-based repeat index
  bool flip = false;

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

/// One row per (image, repeat). Flips are drawn per row from sub-stream 1 of
/// `seed` (so a repeated image may appear both ways); the order is then
/// shuffled with sub-stream 2. Throws config-error if num_repeats < 1.
std::vector<ManifestRow> expand_manifest(const std::vector<std::string>& images, const AugmentConfig& aug,
                                         std::uint64_t seed);
std::vector<ManifestRow> expand_manifest(const CaptionDataset& dataset, const AugmentConfig& aug, std::uint64_t seed);

nlohmann::json to_json(const std::vector<ManifestRow>& rows);

}  // namespace upscaler::dataset
