#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace upscaler::imaging {

// Decoded RGB raster. Samples are floats in [0,1], row-major and
// channel-interleaved, so sample (x, y, c) lives at (y * width + x) * 3 + c.
class ImageBuffer {
 public:
  static constexpr int kChannels = 3;

  ImageBuffer() = default;
  /// Throws invalid-argument unless width, height >= 1.
  ImageBuffer(int width, int height, float fill = 0.0f);
  /// Adopts `pixels` (clamped to [0,1]); throws invalid-argument on a length mismatch.
  ImageBuffer(int width, int height, std::vector<float> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return kChannels; }
  bool empty() const noexcept { return pixels_.empty(); }
  std::size_t sample_count() const noexcept { return pixels_.size(); }

  float at(int x, int y, int c) const noexcept {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }
  float& at(int x, int y, int c) noexcept {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }

  std::span<const float> pixels() const noexcept { return pixels_; }
  // Mutable access; callers that may leave [0,1] must call clamp() afterwards.
  std::span<float> pixels() noexcept { return pixels_; }

  void clamp() noexcept;

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> pixels_;
};

/// Largest absolute per-sample difference; +inf when dimensions differ.
double max_abs_diff(const ImageBuffer& a, const ImageBuffer& b) noexcept;

}  // namespace upscaler::imaging
