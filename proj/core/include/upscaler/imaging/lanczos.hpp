#pragma once

#include "upscaler/imaging/image.hpp"

namespace upscaler::imaging {

enum class Kernel { lanczos, nearest, bilinear };

struct ResampleSpec {
  Kernel kernel = Kernel::lanczos;
  int support_a = 3;  // lobe count, lanczos only
  int target_width = 0;
  int target_height = 0;
};

/// Windowed sinc: sinc(x) * sinc(x / a) for |x| < a, 0 otherwise (normalized sinc).
/// Exactly 1 at 0 and exactly 0 at nonzero integers. Throws invalid-argument if a < 1.
double lanczos_weight(double x, int a);

enum class PassOrder { rows_first, columns_first };

/// Separable two-pass resample. Each output sample is a normalized weighted sum
/// of clamp-to-edge source samples; downscaling widens the kernel by the scale
/// factor. The result is clamped to [0,1] once, after both passes.
ImageBuffer resize(const ImageBuffer& img, const ResampleSpec& spec,
                   PassOrder order = PassOrder::rows_first);

enum class SquareMode {
  stretch,  // anisotropic resize to side x side
  pad,      // aspect-preserving resize, centered on a black side x side canvas
};

ImageBuffer standardize_square(const ImageBuffer& img, int side, SquareMode mode = SquareMode::stretch,
                               int support_a = 3);

}  // namespace upscaler::imaging
