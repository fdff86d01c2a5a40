#include "upscaler/dataset/buckets.hpp"

#include <cmath>
#include <string>

#include "upscaler/error.hpp"

namespace upscaler::dataset {

void validate(const BucketConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.dim_step < 1) problems.push_back("dim_step must be >= 1");
  if (cfg.max_reso < 1) problems.push_back("max_reso must be >= 1");
  if (cfg.dim_step >= 1 && cfg.max_reso % cfg.dim_step != 0) problems.push_back("max_reso must be a multiple of dim_step");
  if (cfg.base_resolution.width < 1 || cfg.base_resolution.height < 1) problems.push_back("base_resolution must be positive");
  if (!problems.empty()) throw_error(ErrorCode::config_error, "invalid bucket config", problems);
}

Dimensions assign_bucket(Dimensions image, const BucketConfig& cfg) {
  validate(cfg);
  if (image.width < 1 || image.height < 1) throw_error(ErrorCode::invalid_argument, "image dimensions must be positive");
  if (!cfg.enabled) return cfg.base_resolution;

  const long long step = cfg.dim_step;
  const long long max_area = static_cast<long long>(cfg.max_reso) * cfg.max_reso;
  const double target = std::log(static_cast<double>(image.width) / image.height);

  Dimensions best{};
  double best_distance = INFINITY;
  long long best_area = -1;
  auto consider = [&](long long bw, long long bh) {
    if (bh < step || bw * bh > max_area) return;
    const double distance = std::fabs(std::log(static_cast<double>(bw) / static_cast<double>(bh)) - target);
    const long long area = bw * bh;
    if (distance < best_distance || (distance == best_distance && area > best_area)) {
      best = {static_cast<int>(bw), static_cast<int>(bh)};
      best_distance = distance;
      best_area = area;
    }
  };
  // Per width, the aspect error is monotone in height on either side of the
  // ideal height, so only the two neighbouring multiples (or the tallest
  // bucket that fits) can win.
  for (long long bw = step; bw * step <= max_area; bw += step) {
    const long long tallest = (max_area / bw) / step * step;
    const double ideal = static_cast<double>(bw) * image.height / image.width;
    const long long below = static_cast<long long>(std::floor(ideal / step)) * step;
    consider(bw, std::min(std::max(below, step), tallest));
    consider(bw, below + step);
  }
  return best;
}

std::vector<BucketAssignment> assign_buckets(std::span<const Dimensions> images, const BucketConfig& cfg) {
  std::vector<BucketAssignment> out;
  out.reserve(images.size());
  for (const auto& d : images) out.push_back({d, assign_bucket(d, cfg)});
  return out;
}

nlohmann::json to_json(const std::vector<BucketAssignment>& assignments) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& a : assignments) {
    rows.push_back({{"source", {a.source.width, a.source.height}}, {"bucket", {a.bucket.width, a.bucket.height}}});
  }
  return rows;
}

}  // namespace upscaler::dataset
