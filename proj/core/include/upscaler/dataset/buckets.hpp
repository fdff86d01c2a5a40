#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace upscaler::dataset {

struct Dimensions {
  int width = 0;
  int height = 0;

  friend bool operator==(const Dimensions&, const Dimensions&) = default;
};

struct BucketConfig {
  bool enabled = true;
  int max_reso = 1024;  // bucket area is bounded by max_reso^2
  int dim_step = 64;
  Dimensions base_resolution{1024, 1024};
};

struct BucketAssignment {
  Dimensions source;
  Dimensions bucket;
};

/// Throws config-error unless max_reso and dim_step are positive and max_reso % dim_step == 0.
void validate(const BucketConfig& cfg);

/// Bucket for one image: both sides multiples of dim_step, area <= max_reso^2,
/// minimizing |log(bw/bh) - log(w/h)|; ties prefer the larger area, then the
/// narrower bucket. Disabled bucketing maps everything to base_resolution.
Dimensions assign_bucket(Dimensions image, const BucketConfig& cfg);

std::vector<BucketAssignment> assign_buckets(std::span<const Dimensions> images, const BucketConfig& cfg);

nlohmann::json to_json(const std::vector<BucketAssignment>& assignments);

}  // namespace upscaler::dataset
