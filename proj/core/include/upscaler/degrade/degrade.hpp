#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "upscaler/imaging/image.hpp"
#include "upscaler/imaging/lanczos.hpp"

namespace upscaler::degrade {

using imaging::ImageBuffer;

/// Adds i.i.d. N(0, sigma^2) noise to every sample, then clamps. sigma >= 0.
ImageBuffer gaussian_noise(const ImageBuffer& img, double sigma, std::uint64_t seed);

/// Photon noise: v -> Poisson(v * scale) / scale, then clamps. scale > 0.
ImageBuffer poisson_noise(const ImageBuffer& img, double scale, std::uint64_t seed);

/// Normalized Gaussian taps of radius ceil(3 * sigma), centre at index radius.
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian blur with clamp-to-edge borders. sigma > 0.
ImageBuffer gaussian_blur(const ImageBuffer& img, double sigma);

/// Standard luminance quantization table scaled to `quality` (IJG scaling), row-major.
std::array<int, 64> scaled_quant_table(int quality);

/// JPEG artifact simulation: per channel, 8x8 DCT, quantize with the scaled
/// luminance table, dequantize, inverse DCT. The DC term is rounded with unit
/// step so flat regions survive unchanged. No entropy coding.
ImageBuffer jpeg_artifacts(const ImageBuffer& img, int quality);

/// Integer-factor downscale: output dims are max(1, round(dim / factor)).
ImageBuffer downsample(const ImageBuffer& img, int factor, imaging::Kernel method = imaging::Kernel::lanczos);

}  // namespace upscaler::degrade
