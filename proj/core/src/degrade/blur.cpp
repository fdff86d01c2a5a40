#include <algorithm>
#include <cmath>

#include "upscaler/degrade/degrade.hpp"
#include "upscaler/error.hpp"

namespace upscaler::degrade {

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw_error(ErrorCode::invalid_argument, "gaussian blur sigma must be > 0");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-(i * i) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = w;
    total += w;
  }
  for (double& w : taps) w /= total;
  return taps;
}

ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma) {
  const auto taps = gaussian_kernel(sigma);
  const int radius = static_cast<int>(taps.size() / 2);
  const int w = img.width();
  const int h = img.height();
  constexpr int C = ImageBuffer::kChannels;

  std::vector<double> tmp(img.sample_count());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += taps[static_cast<std::size_t>(k + radius)] * img.at(std::clamp(x + k, 0, w - 1), y, c);
        }
        tmp[(static_cast<std::size_t>(y) * w + x) * C + c] = acc;
      }
    }
  }
  ImageBuffer out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < C; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int yy = std::clamp(y + k, 0, h - 1);
          acc += taps[static_cast<std::size_t>(k + radius)] * tmp[(static_cast<std::size_t>(yy) * w + x) * C + c];
        }
        out.at(x, y, c) = static_cast<float>(acc);
      }
    }
  }
  out.clamp();
  return out;
}

ImageBuffer downsample(const ImageBuffer& img, int factor, imaging::Kernel method) {
  if (factor < 1) throw_error(ErrorCode::invalid_argument, "downsample factor must be >= 1");
  const int w = std::max(1, static_cast<int>(std::lround(static_cast<double>(img.width()) / factor)));
  const int h = std::max(1, static_cast<int>(std::lround(static_cast<double>(img.height()) / factor)));
  return imaging::resize(img, {method, 3, w, h});
}

}  // namespace upscaler::degrade
