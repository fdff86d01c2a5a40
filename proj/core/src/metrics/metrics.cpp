#include "upscaler/metrics/metrics.hpp"

#include <cmath>

#include "upscaler/error.hpp"

namespace upscaler::metrics {

namespace {

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* op) {
  if (a.empty() || b.empty()) throw_error(ErrorCode::invalid_argument, std::string(op) + ": empty image");
  if (a.width() != b.width() || a.height() != b.height()) {
    throw_error(ErrorCode::invalid_argument,
                std::string(op) + ": dimension mismatch " + std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" + std::to_string(b.height()));
  }
}

// Inclusive-exclusive summed-area table with a zero border row and column.
class Integral {
 public:
  Integral(int w, int h) : w_(w), data_(static_cast<std::size_t>(w + 1) * (h + 1), 0.0) {}

  double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }

  // Sum over [x0, x1) x [y0, y1).
  double box(int x0, int y0, int x1, int y1) const { return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0); }

 private:
  int w_;
  std::vector<double> data_;
};

}  // namespace

double mse(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_shape(a, b, "mse");
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  double acc = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = static_cast<double>(pa[i]) - pb[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pa.size());
}

double psnr_from_mse(double mse_value) {
  if (mse_value < 0.0) throw_error(ErrorCode::invalid_argument, "psnr: negative mse");
  if (mse_value == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse_value));
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) { return psnr_from_mse(mse(a, b)); }

double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimOptions& options) {
  require_same_shape(a, b, "ssim");
  const int win = options.window;
  const int w = a.width();
  const int h = a.height();
  if (win < 1 || w < win || h < win) {
    throw_error(ErrorCode::invalid_argument, "ssim: image smaller than the " + std::to_string(win) + "x" +
                                                 std::to_string(win) + " window");
  }
  const double c1 = options.k1 * options.k1;
  const double c2 = options.k2 * options.k2;
  const double n = static_cast<double>(win) * win;

  double channel_total = 0.0;
  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    Integral sa(w, h), sb(w, h), saa(w, h), sbb(w, h), sab(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double va = a.at(x, y, c);
        const double vb = b.at(x, y, c);
        sa.at(x + 1, y + 1) = va + sa.at(x, y + 1) + sa.at(x + 1, y) - sa.at(x, y);
        sb.at(x + 1, y + 1) = vb + sb.at(x, y + 1) + sb.at(x + 1, y) - sb.at(x, y);
        saa.at(x + 1, y + 1) = va * va + saa.at(x, y + 1) + saa.at(x + 1, y) - saa.at(x, y);
        sbb.at(x + 1, y + 1) = vb * vb + sbb.at(x, y + 1) + sbb.at(x + 1, y) - sbb.at(x, y);
        sab.at(x + 1, y + 1) = va * vb + sab.at(x, y + 1) + sab.at(x + 1, y) - sab.at(x, y);
      }
    }
    double total = 0.0;
    for (int y = 0; y + win <= h; ++y) {
      for (int x = 0; x + win <= w; ++x) {
        const double mu_a = sa.box(x, y, x + win, y + win) / n;
        const double mu_b = sb.box(x, y, x + win, y + win) / n;
        const double var_a = saa.box(x, y, x + win, y + win) / n - mu_a * mu_a;
        const double var_b = sbb.box(x, y, x + win, y + win) / n - mu_b * mu_b;
        const double cov = sab.box(x, y, x + win, y + win) / n - mu_a * mu_b;
        total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
                 ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
      }
    }
    channel_total += total / (static_cast<double>(w - win + 1) * (h - win + 1));
  }
  return channel_total / ImageBuffer::kChannels;
}

double sharpness(const ImageBuffer& img) {
  if (img.width() < 3 || img.height() < 3) throw_error(ErrorCode::invalid_argument, "sharpness: image must be >= 3x3");
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (int c = 0; c < ImageBuffer::kChannels; ++c) {
    for (int y = 1; y + 1 < img.height(); ++y) {
      for (int x = 1; x + 1 < img.width(); ++x) {
        const double r = static_cast<double>(img.at(x - 1, y, c)) + img.at(x + 1, y, c) + img.at(x, y - 1, c) +
                         img.at(x, y + 1, c) - 4.0 * img.at(x, y, c);
        sum += r;
        sum_sq += r * r;
        ++count;
      }
    }
  }
  const double mean = sum / static_cast<double>(count);
  return std::max(0.0, sum_sq / static_cast<double>(count) - mean * mean);
}

}  // namespace upscaler::metrics
