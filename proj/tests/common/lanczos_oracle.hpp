#pragma once

// Independent Lanczos references in long double, shared by the imaging tests
// and the acceptance harness.

#include <algorithm>
#include <cmath>
#include <vector>

#include "upscaler/imaging/image.hpp"

namespace upscaler::test {

using imaging::ImageBuffer;

// Scalar oracle in long double, written from the textbook formula.
inline long double oracle_lanczos(long double x, int a) {
  const long double pi = 3.141592653589793238462643383279502884L;
  if (x == 0) return 1;
  if (std::fabs(x) >= a) return 0;
  return (std::sin(pi * x) / (pi * x)) * (std::sin(pi * x / a) / (pi * x / a));
}

// Brute-force 2D reference: every output sample is the normalized double sum
// over a generous source window, evaluated without any tap tables. Weights
// for one axis are evaluated once per output coordinate and reused.
inline ImageBuffer oracle_resize(const ImageBuffer& in, int tw, int th, int a) {
  struct Tap {
    int src;
    long double w;
  };
  const auto taps = [a](int n_out, int n_in) {
    const double s = static_cast<double>(n_in) / n_out;
    const double f = std::max(1.0, s);
    std::vector<std::vector<Tap>> all(n_out);
    for (int o = 0; o < n_out; ++o) {
      const double c = (o + 0.5) * s - 0.5;
      for (int i = static_cast<int>(c) - 4 * a * static_cast<int>(f) - 2; i <= c + 4 * a * f + 2; ++i) {
        const long double w = oracle_lanczos((i - c) / f, a);
        if (w != 0) all[o].push_back({std::clamp(i, 0, n_in - 1), w});
      }
    }
    return all;
  };
  const auto xs = taps(tw, in.width());
  const auto ys = taps(th, in.height());
  ImageBuffer out(tw, th);
  for (int y = 0; y < th; ++y) {
    for (int x = 0; x < tw; ++x) {
      for (int c = 0; c < 3; ++c) {
        long double num = 0;
        long double den = 0;
        for (const auto& ty : ys[y]) {
          for (const auto& tx : xs[x]) {
            num += tx.w * ty.w * in.at(tx.src, ty.src, c);
            den += tx.w * ty.w;
          }
        }
        out.at(x, y, c) = static_cast<float>(std::clamp(static_cast<double>(num / den), 0.0, 1.0));
      }
    }
  }
  return out;
}

}  // namespace upscaler::test
