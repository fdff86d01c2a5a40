#include "upscaler/dataset/loss_log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "upscaler/error.hpp"

namespace upscaler::dataset {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

}  // namespace

std::vector<LossRecord> read_loss_csv(std::string_view text) {
  std::vector<LossRecord> out;
  int step_col = 0;
  int loss_col = 1;
  std::size_t width = 0;
  std::size_t line_no = 0;
  bool first = true;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (first) {
      first = false;
      double probe = 0.0;
      if (!parse_double(cells[0], probe)) {
        // Header row: locate columns by name.
        step_col = loss_col = -1;
        for (std::size_t i = 0; i < cells.size(); ++i) {
          std::string name(trim(cells[i]));
          std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
          if (name == "step") step_col = static_cast<int>(i);
          if (name == "loss" || name == "value") loss_col = static_cast<int>(i);
        }
        if (step_col < 0 || loss_col < 0) {
          throw_error(ErrorCode::parse_error, "loss log header must name step and loss/value columns (line 1)");
        }
        width = cells.size();
        continue;
      }
      if (cells.size() == 3) {
        step_col = 1;
        loss_col = 2;
      }
      width = cells.size();
    }
    if (cells.size() != width) {
      throw_error(ErrorCode::parse_error, "loss log line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(width) + " columns");
    }
    LossRecord r;
    if (!parse_double(cells[static_cast<std::size_t>(step_col)], r.step) ||
        !parse_double(cells[static_cast<std::size_t>(loss_col)], r.loss)) {
      throw_error(ErrorCode::parse_error, "loss log line " + std::to_string(line_no) + ": not numeric");
    }
    out.push_back(r);
  }
  return out;
}

LossSummary summarize_loss(std::vector<LossRecord> records) {
  if (records.size() < 2) throw_error(ErrorCode::invalid_argument, "loss log needs at least two records");
  for (const auto& r : records) {
    if (!std::isfinite(r.step) || !std::isfinite(r.loss)) {
      throw_error(ErrorCode::invalid_argument, "loss log contains non-finite values");
    }
  }
  std::stable_sort(records.begin(), records.end(), [](const LossRecord& a, const LossRecord& b) { return a.step < b.step; });
  LossSummary s;
  s.initial = records.front().loss;
  const double mid = (records.front().step + records.back().step) / 2.0;
  double sum = 0.0;
  for (const auto& r : records) {
    if (r.step >= mid) {
      sum += r.loss;
      ++s.plateau_count;
    }
  }
  s.plateau_mean = sum / static_cast<double>(s.plateau_count);
  double sq = 0.0;
  for (const auto& r : records) {
    if (r.step >= mid) sq += (r.loss - s.plateau_mean) * (r.loss - s.plateau_mean);
  }
  s.plateau_std = std::sqrt(sq / static_cast<double>(s.plateau_count));
  s.diverged = s.plateau_mean > s.initial;
  s.series = std::move(records);
  return s;
}

LossSummary parse_loss_log(std::string_view csv_text) { return summarize_loss(read_loss_csv(csv_text)); }

nlohmann::json to_json(const LossSummary& s, bool include_series) {
  nlohmann::json out = {{"initial", s.initial},
                        {"plateau_mean", s.plateau_mean},
                        {"plateau_std", s.plateau_std},
                        {"plateau_count", s.plateau_count},
                        {"records", s.series.size()},
                        {"diverged", s.diverged}};
  if (include_series) {
    nlohmann::json series = nlohmann::json::array();
    for (const auto& r : s.series) series.push_back({r.step, r.loss});
    out["series"] = std::move(series);
  }
  return out;
}

}  // namespace upscaler::dataset
