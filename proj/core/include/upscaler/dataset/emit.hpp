#pragma once

#include <string>
#include <vector>

#include "upscaler/dataset/buckets.hpp"
#include "upscaler/dataset/manifest.hpp"
#include "upscaler/dataset/training.hpp"

namespace upscaler::dataset {

struct DatasetTomlConfig {
  BucketConfig bucket;
  AugmentConfig augment;
  std::string image_dir = "/workspace/imgs";
  std::string metadata_file = "/workspace/captions_kohya.json";
};

/// Kohya dataset TOML: one [[datasets]] table with one indented subset.
/// bucket_reso_steps is written only when dim_step differs from 64.
/// Throws config-error on invalid bucket or augment settings.
std::string emit_dataset_toml(const DatasetTomlConfig& cfg);

/// Launch arguments for flux_train_network.py, one token per element. Model
/// paths use --flag=value; other valued options are two tokens. Known switches
/// keep their canonical position; unknown passthrough flags follow, sorted.
/// Throws config-error when validate(cfg) fails (e.g. alpha > dim).
std::vector<std::string> emit_train_command(const TrainRunConfig& cfg);

/// "accelerate launch flux_train_network.py \" followed by one option per line.
std::string render_command(const std::vector<std::string>& args);

/// Shortest round-trip decimal with a trimmed exponent ("1e-4", "3.1582"); when
/// `keep_point` is set integral values keep a ".0" suffix.
std::string format_number(double v, bool keep_point = false);

}  // namespace upscaler::dataset
