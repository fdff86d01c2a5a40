#include <algorithm>
#include <cmath>
#include <numbers>

#include "upscaler/degrade/degrade.hpp"
#include "upscaler/error.hpp"

namespace upscaler::degrade {

namespace {

// ITU-T T.81 Annex K, Table K.1.
constexpr std::array<int, 64> kLuminanceTable = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};

// Orthonormal DCT-II basis: basis[u][x] = c(u)/2 * cos((2x+1) u pi / 16).
struct DctBasis {
  double m[8][8];
  DctBasis() {
    for (int u = 0; u < 8; ++u) {
      const double cu = u == 0 ? std::sqrt(0.5) : 1.0;
      for (int x = 0; x < 8; ++x) m[u][x] = 0.5 * cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
    }
  }
};

const DctBasis& basis() {
  static const DctBasis b;
  return b;
}

void forward_dct(const double in[8][8], double out[8][8]) {
  const auto& B = basis().m;
  double tmp[8][8];
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += B[u][x] * in[y][x];
      tmp[y][u] = acc;
    }
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += B[v][y] * tmp[y][u];
      out[v][u] = acc;
    }
}

void inverse_dct(const double in[8][8], double out[8][8]) {
  const auto& B = basis().m;
  double tmp[8][8];
  for (int v = 0; v < 8; ++v)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += B[u][x] * in[v][u];
      tmp[v][x] = acc;
    }
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += B[v][y] * tmp[v][x];
      out[y][x] = acc;
    }
}

}  // namespace

std::array<int, 64> scaled_quant_table(int quality) {
  if (quality < 1 || quality > 100) throw_error(ErrorCode::invalid_argument, "jpeg quality must be in [1,100]");
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, 64> table{};
  for (std::size_t i = 0; i < table.size(); ++i) {
    table[i] = std::clamp((kLuminanceTable[i] * scale + 50) / 100, 1, 255);
  }
  return table;
}

ImageBuffer jpeg_artifacts(const ImageBuffer& img, int quality) {
  if (quality < 10 || quality > 100) throw_error(ErrorCode::invalid_argument, "jpeg_artifacts: quality must be in [10,100]");
  const auto table = scaled_quant_table(quality);
  const int w = img.width();
  const int h = img.height();
  ImageBuffer out(w, h);
  double block[8][8];
  double coeff[8][8];
  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    for (int by = 0; by < h; by += 8) {
      for (int bx = 0; bx < w; bx += 8) {
        // Partial edge blocks are padded by edge replication, as encoders do.
        for (int y = 0; y < 8; ++y)
          for (int x = 0; x < 8; ++x)
            block[y][x] = img.at(std::min(bx + x, w - 1), std::min(by + y, h - 1), c) * 255.0 - 128.0;
        forward_dct(block, coeff);
        for (int v = 0; v < 8; ++v)
          for (int u = 0; u < 8; ++u) {
            const int q = (u == 0 && v == 0) ? 1 : table[static_cast<std::size_t>(v * 8 + u)];
            coeff[v][u] = std::round(coeff[v][u] / q) * q;
          }
        inverse_dct(coeff, block);
        for (int y = 0; y < 8 && by + y < h; ++y)
          for (int x = 0; x < 8 && bx + x < w; ++x)
            out.at(bx + x, by + y, c) = static_cast<float>((block[y][x] + 128.0) / 255.0);
      }
    }
  }
  out.clamp();
  return out;
}

}  // namespace upscaler::degrade
