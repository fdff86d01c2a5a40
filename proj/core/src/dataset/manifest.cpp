#include "upscaler/dataset/manifest.hpp"

#include "upscaler/error.hpp"
#include "upscaler/rng.hpp"

namespace upscaler::dataset {

std::vector<ManifestRow> expand_manifest(const std::vector<std::string>& images, const AugmentConfig& aug,
                                         std::uint64_t seed) {
  if (aug.num_repeats < 1) throw_error(ErrorCode::config_error, "num_repeats must be >= 1");
  const Rng root(seed);
  Rng flips = root.split(1);
  Rng order = root.split(2);
  std::vector<ManifestRow> rows;
  rows.reserve(images.size() * static_cast<std::size_t>(aug.num_repeats));
  for (const auto& image : images) {
    for (int r = 0; r < aug.num_repeats; ++r) {
      rows.push_back({image, r, aug.flip_aug && flips.bernoulli(0.5)});
    }
  }
  order.shuffle(rows.begin(), rows.end());
  return rows;
}

std::vector<ManifestRow> expand_manifest(const CaptionDataset& dataset, const AugmentConfig& aug, std::uint64_t seed) {
  std::vector<std::string> images;
  images.reserve(dataset.entries.size());
  for (const auto& [path, caption] : dataset.entries) images.push_back(path);
  return expand_manifest(images, aug, seed);
}

nlohmann::json to_json(const std::vector<ManifestRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) out.push_back({{"image", r.image}, {"repeat", r.repeat}, {"flip", r.flip}});
  return out;
}

}  // namespace upscaler::dataset
