#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace upscaler::dataset {

struct CaptionEntry {
  std::string key;                 // image path as written in the JSON
  std::filesystem::path resolved;  // where it was found (empty if missing)
  std::string caption;
  std::vector<std::string> findings;

  bool ok() const noexcept { return findings.empty(); }
};

struct CaptionReport {
  std::vector<CaptionEntry> entries;  // sorted by key
  std::vector<std::string> findings;  // document-level problems

  std::size_t valid_count() const noexcept;
  bool ok() const noexcept;
};

/// Checks a caption metadata file: a top-level object mapping image paths to
/// {"caption": "..."} objects. Relative keys resolve under root_dir; absolute
/// keys are used as-is and, when absent, looked up by file name under root_dir.
/// Every image must exist and decode. Throws parse-error (with byte offset) on
/// malformed JSON.
CaptionReport validate_captions(std::string_view json_text, const std::filesystem::path& root_dir);

// A validated dataset: image key -> caption.
struct CaptionDataset {
  std::filesystem::path root_dir;
  std::map<std::string, std::string> entries;
};

/// validate_captions, then throws validation-error if any finding exists.
CaptionDataset load_caption_dataset(std::string_view json_text, const std::filesystem::path& root_dir);

nlohmann::json to_json(const CaptionReport& report);

}  // namespace upscaler::dataset
