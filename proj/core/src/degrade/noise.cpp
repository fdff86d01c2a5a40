#include <algorithm>

#include "upscaler/degrade/degrade.hpp"
#include "upscaler/error.hpp"
#include "upscaler/rng.hpp"

namespace upscaler::degrade {

ImageBuffer gaussian_noise(const ImageBuffer& img, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw_error(ErrorCode::invalid_argument, "gaussian_noise: sigma must be >= 0");
  ImageBuffer out = img;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (float& v : out.pixels()) v = static_cast<float>(v + sigma * rng.normal());
  out.clamp();
  return out;
}

ImageBuffer poisson_noise(const ImageBuffer& img, double scale, std::uint64_t seed) {
  if (!(scale > 0.0)) throw_error(ErrorCode::invalid_argument, "poisson_noise: scale must be > 0");
  ImageBuffer out = img;
  Rng rng(seed);
  for (float& v : out.pixels()) {
    const double lambda = std::max(0.0, static_cast<double>(v)) * scale;
    v = static_cast<float>(static_cast<double>(rng.poisson(lambda)) / scale);
  }
  out.clamp();
  return out;
}

}  // namespace upscaler::degrade
