#include <algorithm>

#include "upscaler/error.hpp"
#include "upscaler/metrics/metrics.hpp"

namespace upscaler::metrics {

Report compare_report(const ImageBuffer* ground_truth, const std::vector<Candidate>& candidates) {
  if (candidates.empty()) throw_error(ErrorCode::invalid_argument, "compare_report: no candidates");
  Report report;
  report.blind = ground_truth == nullptr;
  for (const auto& cand : candidates) {
    CandidateScore score;
    score.id = cand.id;
    score.sharpness = sharpness(cand.image);
    if (ground_truth != nullptr) {
      score.psnr = psnr(*ground_truth, cand.image);
      score.ssim = ssim(*ground_truth, cand.image);
    }
    report.ranked.push_back(std::move(score));
  }
  auto better = [blind = report.blind](const CandidateScore& x, const CandidateScore& y) {
    if (blind) {
      if (x.sharpness != y.sharpness) return x.sharpness > y.sharpness;
    } else {
      if (*x.ssim != *y.ssim) return *x.ssim > *y.ssim;
      if (*x.psnr != *y.psnr) return *x.psnr > *y.psnr;
    }
    return x.id < y.id;
  };
  std::stable_sort(report.ranked.begin(), report.ranked.end(), better);
  for (std::size_t i = 0; i < report.ranked.size(); ++i) report.ranked[i].rank = static_cast<int>(i + 1);
  return report;
}

nlohmann::json to_json(const Report& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : report.ranked) {
    nlohmann::json row = {{"rank", s.rank}, {"id", s.id}, {"sharpness", s.sharpness}};
    if (s.psnr) row["psnr"] = *s.psnr;
    if (s.ssim) row["ssim"] = *s.ssim;
    rows.push_back(std::move(row));
  }
  return {{"blind", report.blind}, {"ranking", report.blind ? "sharpness" : "ssim,psnr"}, {"candidates", rows}};
}

}  // namespace upscaler::metrics
