#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "upscaler/imaging/image.hpp"

namespace upscaler::metrics {

using imaging::ImageBuffer;

/// Value reported for identical images instead of +inf.
inline constexpr double kPsnrCap = 99.0;

/// Mean squared error over all samples. Throws invalid-argument on a size mismatch.
double mse(const ImageBuffer& a, const ImageBuffer& b);

/// 10 log10(1 / mse), capped at kPsnrCap.
double psnr_from_mse(double mse_value);
double psnr(const ImageBuffer& a, const ImageBuffer& b);

struct SsimOptions {
  int window = 8;
  double k1 = 0.01;
  double k2 = 0.03;
};

/// Mean SSIM over every window x window position (stride 1, uniform weights,
/// population moments, dynamic range 1), computed per RGB channel and averaged.
/// Throws invalid-argument when the images differ in size or are smaller than the window.
double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimOptions& options = {});

/// Population variance of the 4-neighbour Laplacian over interior pixels, all
/// channels pooled. Higher means crisper. Requires width, height >= 3.
double sharpness(const ImageBuffer& img);

struct Candidate {
  std::string id;
  ImageBuffer image;
};

struct CandidateScore {
  std::string id;
  std::optional<double> psnr;
  std::optional<double> ssim;
  double sharpness = 0.0;
  int rank = 0;  // 1-based
};

struct Report {
  bool blind = true;  // no ground truth: ranked by sharpness
  std::vector<CandidateScore> ranked;
};

/// Ranks by (SSIM desc, PSNR desc) against ground truth, or by sharpness desc
/// when blind; ties go to the smaller id. Throws invalid-argument on an empty list.
Report compare_report(const ImageBuffer* ground_truth, const std::vector<Candidate>& candidates);

nlohmann::json to_json(const Report& report);

}  // namespace upscaler::metrics
