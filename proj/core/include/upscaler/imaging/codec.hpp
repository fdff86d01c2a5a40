#pragma once

#include <filesystem>
#include <span>

#include "upscaler/hash.hpp"
#include "upscaler/imaging/image.hpp"

namespace upscaler::imaging {

/// Decodes PNG or JPEG (sniffed from the signature). 8-bit values map to v/255;
/// gray and alpha inputs are converted to RGB on a black background.
/// Throws decode-error on malformed or truncated streams.
ImageBuffer load_image(std::span<const std::uint8_t> bytes);

/// Samples are quantized with round(v * 255).
Bytes save_png(const ImageBuffer& img);
Bytes save_jpeg(const ImageBuffer& img, int quality);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
ImageBuffer load_image_file(const std::filesystem::path& path);

/// Rounds every sample to the nearest 8-bit level, exactly as encoding would.
ImageBuffer quantize_8bit(const ImageBuffer& img);

}  // namespace upscaler::imaging
