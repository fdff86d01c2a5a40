#include "upscaler/imaging/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "upscaler/error.hpp"

namespace upscaler::imaging {

namespace {

void check_dims(int width, int height) {
  if (width < 1 || height < 1) {
    throw_error(ErrorCode::invalid_argument,
                "image dimensions must be >= 1, got " + std::to_string(width) + "x" + std::to_string(height));
  }
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, float fill) : width_(width), height_(height) {
  check_dims(width, height);
  pixels_.assign(static_cast<std::size_t>(width) * height * kChannels, std::clamp(fill, 0.0f, 1.0f));
}

ImageBuffer::ImageBuffer(int width, int height, std::vector<float> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  check_dims(width, height);
  if (pixels_.size() != static_cast<std::size_t>(width) * height * kChannels) {
    throw_error(ErrorCode::invalid_argument, "pixel buffer length does not match width*height*3");
  }
  clamp();
}

void ImageBuffer::clamp() noexcept {
  for (float& v : pixels_) {
    v = std::isnan(v) ? 0.0f : std::clamp(v, 0.0f, 1.0f);
  }
}

double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) noexcept {
  if (a.width() != b.width() || a.height() != b.height()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  auto pa = a.pixels();
  auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    worst = std::max(worst, std::fabs(static_cast<double>(pa[i]) - pb[i]));
  }
  return worst;
}

}  // namespace upscaler::imaging
