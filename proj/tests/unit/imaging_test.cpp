#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lanczos_oracle.hpp"
#include "test_support.hpp"
#include "upscaler/error.hpp"
#include "upscaler/imaging/codec.hpp"
#include "upscaler/imaging/lanczos.hpp"

using namespace upscaler;
using namespace upscaler::imaging;

using test::oracle_lanczos;
using test::oracle_resize;

TEST(LanczosWeight, CenterAndZeroCrossingsAreExact) {
  EXPECT_EQ(lanczos_weight(0.0, 3), 1.0);
  for (int n = 1; n < 3; ++n) {
    EXPECT_EQ(lanczos_weight(n, 3), 0.0);
    EXPECT_EQ(lanczos_weight(-n, 3), 0.0);
  }
  EXPECT_EQ(lanczos_weight(3.0, 3), 0.0);
  EXPECT_EQ(lanczos_weight(7.25, 3), 0.0);
}

TEST(LanczosWeight, HalfOffsetMatchesScalarOracle) {
  const double expected = static_cast<double>(oracle_lanczos(0.5L, 3));
  EXPECT_NEAR(expected, 0.6079, 5e-5);
  EXPECT_NEAR(lanczos_weight(0.5, 3), expected, 1e-12);
}

TEST(LanczosWeight, SymmetricAndMatchesOracleOnAGrid) {
  for (int a = 1; a <= 4; ++a) {
    for (double x = -5.0; x <= 5.0; x += 0.0137) {
      EXPECT_EQ(lanczos_weight(x, a), lanczos_weight(-x, a));
      EXPECT_NEAR(lanczos_weight(x, a), static_cast<double>(oracle_lanczos(x, a)), 1e-12);
    }
  }
}

TEST(LanczosWeight, RejectsLobeCountBelowOne) {
  try {
    lanczos_weight(0.3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

TEST(Resize, ConstantImageStaysConstant) {
  ImageBuffer img(100, 60, 0.25f);
  const auto out = resize(img, {Kernel::lanczos, 3, 256, 256});
  ASSERT_EQ(out.width(), 256);
  ASSERT_EQ(out.height(), 256);
  for (float v : out.pixels()) EXPECT_NEAR(v, 0.25, 1e-6);
}

TEST(Resize, DownThenUpOfConstantStaysConstant) {
  ImageBuffer img(97, 131, 0.6f);
  const auto down = resize(img, {Kernel::lanczos, 3, 13, 17});
  const auto up = resize(down, {Kernel::lanczos, 3, 200, 150});
  for (float v : up.pixels()) EXPECT_NEAR(v, 0.6, 1e-6);
}

TEST(Resize, IdentityWhenTargetEqualsSource) {
  const auto img = test::random_image(37, 23, 11);
  const auto out = resize(img, {Kernel::lanczos, 3, 37, 23});
  EXPECT_LE(max_abs_diff(img, out), 1e-6);
}

TEST(Resize, FourPixelRowMatchesBruteForce) {
  ImageBuffer row(4, 1);
  for (int x = 0; x < 4; ++x)
    for (int c = 0; c < 3; ++c) row.at(x, 0, c) = static_cast<float>(x % 2);
  const auto out = resize(row, {Kernel::lanczos, 3, 8, 1});
  const auto ref = oracle_resize(row, 8, 1, 3);
  EXPECT_LE(max_abs_diff(out, ref), 1e-6);
}

TEST(Resize, RandomCasesMatchBruteForce) {
  Rng rng(99);
  for (int k = 0; k < 25; ++k) {
    const int w = static_cast<int>(rng.uniform_int(1, 24));
    const int h = static_cast<int>(rng.uniform_int(1, 24));
    const int tw = static_cast<int>(rng.uniform_int(1, 40));
    const int th = static_cast<int>(rng.uniform_int(1, 40));
    const int a = static_cast<int>(rng.uniform_int(1, 4));
    const auto img = test::random_image(w, h, rng());
    const auto out = resize(img, {Kernel::lanczos, a, tw, th});
    const auto ref = oracle_resize(img, tw, th, a);
    EXPECT_LE(max_abs_diff(out, ref), 1e-5) << w << "x" << h << " -> " << tw << "x" << th << " a=" << a;
  }
}

TEST(Resize, PassOrderDoesNotMatter) {
  const auto img = test::random_image(31, 19, 5);
  for (auto [tw, th] : {std::pair{64, 40}, std::pair{10, 7}, std::pair{50, 9}}) {
    const auto rows = resize(img, {Kernel::lanczos, 3, tw, th}, PassOrder::rows_first);
    const auto cols = resize(img, {Kernel::lanczos, 3, tw, th}, PassOrder::columns_first);
    EXPECT_LE(max_abs_diff(rows, cols), 1e-6);
  }
}

TEST(Resize, OutputsStayInUnitRange) {
  // A hard step rings under Lanczos; the result must still be clamped.
  ImageBuffer img(8, 8, 0.0f);
  for (int y = 0; y < 8; ++y)
    for (int x = 4; x < 8; ++x)
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = 1.0f;
  const auto out = resize(img, {Kernel::lanczos, 3, 64, 64});
  for (float v : out.pixels()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
}

TEST(Resize, OtherKernelsPreserveConstants) {
  ImageBuffer img(20, 30, 0.4f);
  for (auto k : {Kernel::nearest, Kernel::bilinear}) {
    const auto out = resize(img, {k, 3, 7, 45});
    for (float v : out.pixels()) EXPECT_NEAR(v, 0.4, 1e-6);
  }
}

TEST(Resize, RejectsBadTargets) {
  ImageBuffer img(4, 4);
  EXPECT_THROW(resize(img, {Kernel::lanczos, 3, 0, 4}), Error);
  EXPECT_THROW(resize(ImageBuffer{}, {Kernel::lanczos, 3, 4, 4}), Error);
}

TEST(StandardizeSquare, PipelineSizes) {
  const auto tiny = test::random_image(60, 60, 1);
  const auto big = standardize_square(tiny, 1024);
  EXPECT_EQ(big.width(), 1024);
  EXPECT_EQ(big.height(), 1024);
  const auto archive = standardize_square(test::random_image(100, 100, 2), 256);
  EXPECT_EQ(archive.width(), 256);
  EXPECT_EQ(archive.height(), 256);
}

TEST(StandardizeSquare, StretchesNonSquareAndIdentityOnSquare) {
  const auto wide = standardize_square(test::random_image(90, 30, 3), 48);
  EXPECT_EQ(wide.width(), 48);
  EXPECT_EQ(wide.height(), 48);
  const auto sq = test::random_image(40, 40, 4);
  EXPECT_LE(max_abs_diff(standardize_square(sq, 40), sq), 1e-6);
  EXPECT_THROW(standardize_square(sq, 0), Error);
}

TEST(StandardizeSquare, PadModeLetterboxes) {
  ImageBuffer wide(80, 40, 1.0f);
  const auto out = standardize_square(wide, 40, SquareMode::pad);
  EXPECT_EQ(out.width(), 40);
  EXPECT_FLOAT_EQ(out.at(20, 0, 0), 0.0f);   // black band
  EXPECT_NEAR(out.at(20, 20, 0), 1.0, 1e-6);  // content
}

TEST(Codec, PngRoundTripIsLosslessAfterQuantization) {
  const auto img = test::random_image(33, 17, 8);
  const auto back = load_image(save_png(img));
  EXPECT_EQ(back, quantize_8bit(img));
}

TEST(Codec, QuantizationUsesRoundTimes255) {
  ImageBuffer img(1, 1);
  img.at(0, 0, 0) = 0.5f;      // 127.5 -> 128
  img.at(0, 0, 1) = 0.3f;      // 76.5 -> 77 (float 0.3 is just above)
  img.at(0, 0, 2) = 1.0f / 255;
  const auto q = load_image(save_png(img));
  EXPECT_FLOAT_EQ(q.at(0, 0, 0), 128.0f / 255);
  EXPECT_FLOAT_EQ(q.at(0, 0, 2), 1.0f / 255);
}

TEST(Codec, JpegQuality100IsClose) {
  ImageBuffer grad(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) {
      grad.at(x, y, 0) = x / 15.0f;
      grad.at(x, y, 1) = y / 15.0f;
      grad.at(x, y, 2) = (x + y) / 30.0f;
    }
  const auto back = load_image(save_jpeg(grad, 100));
  EXPECT_LE(max_abs_diff(back, grad), 0.02);
}

TEST(Codec, TruncatedOrGarbageStreamsFailWithDecodeError) {
  const auto png = save_png(test::random_image(16, 16, 9));
  const auto jpg = save_jpeg(test::random_image(16, 16, 9), 90);
  for (const auto* full : {&png, &jpg}) {
    Bytes cut(full->begin(), full->begin() + static_cast<std::ptrdiff_t>(full->size() / 2));
    try {
      load_image(cut);
      FAIL() << "truncated stream decoded";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::decode_error);
    }
  }
  const Bytes junk{1, 2, 3, 4, 5};
  EXPECT_THROW(load_image(junk), Error);
  EXPECT_THROW(load_image(Bytes{}), Error);
}

TEST(ImageBuffer, ConstructionChecks) {
  EXPECT_THROW(ImageBuffer(0, 3), Error);
  EXPECT_THROW(ImageBuffer(2, 2, std::vector<float>(5)), Error);
  ImageBuffer clamped(1, 1, std::vector<float>{-1.0f, 0.5f, 2.0f});
  EXPECT_EQ(clamped.at(0, 0, 0), 0.0f);
  EXPECT_EQ(clamped.at(0, 0, 2), 1.0f);
}
