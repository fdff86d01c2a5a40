#include "upscaler/imaging/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "upscaler/error.hpp"

namespace upscaler::imaging {

namespace {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

struct Tap {
  int index;
  double weight;
};

// Normalized taps for every output position along one axis.
std::vector<std::vector<Tap>> axis_taps(int in_size, int out_size, const ResampleSpec& spec) {
  const double scale = static_cast<double>(in_size) / out_size;
  const double filter_scale = std::max(scale, 1.0);
  double support = 0.0;
  switch (spec.kernel) {
    case Kernel::lanczos: support = spec.support_a; break;
    case Kernel::bilinear: support = 1.0; break;
    case Kernel::nearest: support = 0.5; break;
  }
  support *= filter_scale;

  auto kernel = [&](double x) -> double {
    switch (spec.kernel) {
      case Kernel::lanczos: return lanczos_weight(x, spec.support_a);
      case Kernel::bilinear: return std::max(0.0, 1.0 - std::fabs(x));
      case Kernel::nearest: return (x >= -0.5 && x < 0.5) ? 1.0 : 0.0;
    }
    return 0.0;
  };

  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(out_size));
  std::vector<double> accum(static_cast<std::size_t>(in_size));
  for (int i = 0; i < out_size; ++i) {
    const double center = (i + 0.5) * scale - 0.5;
    const int first = static_cast<int>(std::ceil(center - support));
    const int last = static_cast<int>(std::floor(center + support));
    int lo = in_size;
    int hi = -1;
    double total = 0.0;
    for (int j = first; j <= last; ++j) {
      const double w = kernel((j - center) / filter_scale);
      if (w == 0.0) continue;
      const int src = std::clamp(j, 0, in_size - 1);
      accum[src] += w;
      total += w;
      lo = std::min(lo, src);
      hi = std::max(hi, src);
    }
    auto& row = taps[static_cast<std::size_t>(i)];
    if (hi < lo || total == 0.0) {
      // Degenerate window (cannot happen for the shipped kernels); fall back to nearest.
      row.push_back({std::clamp(static_cast<int>(std::lround(center)), 0, in_size - 1), 1.0});
      continue;
    }
    for (int src = lo; src <= hi; ++src) {
      if (accum[src] != 0.0) row.push_back({src, accum[src] / total});
      accum[src] = 0.0;
    }
  }
  return taps;
}

// Unclamped planar-free working buffer, interleaved like ImageBuffer.
struct Work {
  int width;
  int height;
  std::vector<double> data;
};

Work resample_horizontal(const Work& in, int out_width, const ResampleSpec& spec) {
  const auto taps = axis_taps(in.width, out_width, spec);
  constexpr int C = ImageBuffer::kChannels;
  Work out{out_width, in.height, std::vector<double>(static_cast<std::size_t>(out_width) * in.height * C)};
  for (int y = 0; y < in.height; ++y) {
    const double* src_row = in.data.data() + static_cast<std::size_t>(y) * in.width * C;
    double* dst_row = out.data.data() + static_cast<std::size_t>(y) * out_width * C;
    for (int x = 0; x < out_width; ++x) {
      double acc[C] = {0.0, 0.0, 0.0};
      for (const Tap& t : taps[static_cast<std::size_t>(x)]) {
        const double* px = src_row + static_cast<std::size_t>(t.index) * C;
        for (int c = 0; c < C; ++c) acc[c] += t.weight * px[c];
      }
      for (int c = 0; c < C; ++c) dst_row[x * C + c] = acc[c];
    }
  }
  return out;
}

Work resample_vertical(const Work& in, int out_height, const ResampleSpec& spec) {
  const auto taps = axis_taps(in.height, out_height, spec);
  constexpr int C = ImageBuffer::kChannels;
  const std::size_t stride = static_cast<std::size_t>(in.width) * C;
  Work out{in.width, out_height, std::vector<double>(stride * out_height, 0.0)};
  for (int y = 0; y < out_height; ++y) {
    double* dst_row = out.data.data() + static_cast<std::size_t>(y) * stride;
    for (const Tap& t : taps[static_cast<std::size_t>(y)]) {
      const double* src_row = in.data.data() + static_cast<std::size_t>(t.index) * stride;
      for (std::size_t k = 0; k < stride; ++k) dst_row[k] += t.weight * src_row[k];
    }
  }
  return out;
}

}  // namespace

double lanczos_weight(double x, int a) {
  if (a < 1) throw_error(ErrorCode::invalid_argument, "lanczos lobe count must be >= 1, got " + std::to_string(a));
  const double ax = std::fabs(x);
  if (ax >= a) return 0.0;
  if (ax == 0.0) return 1.0;
  if (ax == std::floor(ax)) return 0.0;
  return sinc(x) * sinc(x / a);
}

ImageBuffer resize(const ImageBuffer& img, const ResampleSpec& spec, PassOrder order) {
  if (img.empty()) throw_error(ErrorCode::invalid_argument, "resize: empty image");
  if (spec.target_width < 1 || spec.target_height < 1) {
    throw_error(ErrorCode::invalid_argument, "resize: target dimensions must be >= 1");
  }
  if (spec.kernel == Kernel::lanczos && spec.support_a < 1) {
    throw_error(ErrorCode::invalid_argument, "resize: lanczos support_a must be >= 1");
  }
  Work work{img.width(), img.height(), std::vector<double>(img.pixels().begin(), img.pixels().end())};
  if (order == PassOrder::rows_first) {
    work = resample_horizontal(work, spec.target_width, spec);
    work = resample_vertical(work, spec.target_height, spec);
  } else {
    work = resample_vertical(work, spec.target_height, spec);
    work = resample_horizontal(work, spec.target_width, spec);
  }
  std::vector<float> pixels(work.data.size());
  std::transform(work.data.begin(), work.data.end(), pixels.begin(),
                 [](double v) { return static_cast<float>(std::clamp(v, 0.0, 1.0)); });
  return ImageBuffer(spec.target_width, spec.target_height, std::move(pixels));
}

ImageBuffer standardize_square(const ImageBuffer& img, int side, SquareMode mode, int support_a) {
  if (side < 1) throw_error(ErrorCode::invalid_argument, "standardize_square: side must be >= 1");
  if (img.empty()) throw_error(ErrorCode::invalid_argument, "standardize_square: empty image");
  if (mode == SquareMode::stretch) {
    return resize(img, {Kernel::lanczos, support_a, side, side});
  }
  const int longest = std::max(img.width(), img.height());
  const int w = std::max(1, static_cast<int>(std::lround(static_cast<double>(img.width()) * side / longest)));
  const int h = std::max(1, static_cast<int>(std::lround(static_cast<double>(img.height()) * side / longest)));
  const ImageBuffer fitted = resize(img, {Kernel::lanczos, support_a, w, h});
  ImageBuffer canvas(side, side, 0.0f);
  const int ox = (side - w) / 2;
  const int oy = (side - h) / 2;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ImageBuffer::kChannels; ++c) canvas.at(ox + x, oy + y, c) = fitted.at(x, y, c);
    }
  }
  return canvas;
}

}  // namespace upscaler::imaging
