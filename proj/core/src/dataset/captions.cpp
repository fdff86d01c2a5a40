#include "upscaler/dataset/captions.hpp"

#include <algorithm>

#include "upscaler/error.hpp"
#include "upscaler/imaging/codec.hpp"

namespace upscaler::dataset {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const std::string& key, const fs::path& root_dir) {
  const fs::path p(key);
  std::error_code ec;
  if (p.is_absolute()) {
    if (fs::exists(p, ec)) return p;
    if (!root_dir.empty() && fs::exists(root_dir / p.filename(), ec)) return root_dir / p.filename();
    return {};
  }
  const fs::path joined = root_dir / p;
  return fs::exists(joined, ec) ? joined : fs::path{};
}

}  // namespace

std::size_t CaptionReport::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.ok(); }));
}

bool CaptionReport::ok() const noexcept { return findings.empty() && valid_count() == entries.size(); }

CaptionReport validate_captions(std::string_view json_text, const fs::path& root_dir) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw_error(ErrorCode::parse_error, "caption JSON is malformed at byte " + std::to_string(e.byte) + ": " + e.what(),
                {"byte " + std::to_string(e.byte)});
  }
  CaptionReport report;
  if (!doc.is_object()) {
    report.findings.push_back("top-level value must be an object mapping image paths to caption records");
    return report;
  }
  if (doc.empty()) report.findings.push_back("caption file contains no entries");
  for (const auto& [key, value] : doc.items()) {
    CaptionEntry entry;
    entry.key = key;
    if (!value.is_object()) {
      entry.findings.push_back("value must be an object with a \"caption\" string");
    } else if (!value.contains("caption")) {
      entry.findings.push_back("missing \"caption\" key");
    } else if (!value["caption"].is_string()) {
      entry.findings.push_back("\"caption\" must be a string");
    } else {
      entry.caption = value["caption"].get<std::string>();
      if (entry.caption.find_first_not_of(" \t\r\n") == std::string::npos) entry.findings.push_back("caption is empty");
    }
    entry.resolved = resolve(key, root_dir);
    if (entry.resolved.empty()) {
      entry.findings.push_back("image file not found");
    } else {
      try {
        (void)imaging::load_image_file(entry.resolved);
      } catch (const Error& e) {
        entry.findings.push_back(std::string("image does not decode: ") + e.what());
      }
    }
    report.entries.push_back(std::move(entry));
  }
  std::sort(report.entries.begin(), report.entries.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
  return report;
}

CaptionDataset load_caption_dataset(std::string_view json_text, const fs::path& root_dir) {
  const auto report = validate_captions(json_text, root_dir);
  if (!report.ok()) {
    std::vector<std::string> details = report.findings;
    for (const auto& e : report.entries)
      for (const auto& f : e.findings) details.push_back(e.key + ": " + f);
    throw_error(ErrorCode::validation_error, "caption dataset is invalid", details);
  }
  CaptionDataset ds;
  ds.root_dir = root_dir;
  for (const auto& e : report.entries) ds.entries.emplace(e.key, e.caption);
  return ds;
}

nlohmann::json to_json(const CaptionReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries) {
    entries.push_back({{"path", e.key}, {"resolved", e.resolved.string()}, {"valid", e.ok()}, {"findings", e.findings}});
  }
  return {{"valid", report.ok()},
          {"entries_total", report.entries.size()},
          {"entries_valid", report.valid_count()},
          {"findings", report.findings},
          {"entries", std::move(entries)}};
}

}  // namespace upscaler::dataset
