#pragma once

#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace upscaler::dataset {

struct LossRecord {
  double step = 0.0;
  double loss = 0.0;
};

struct LossSummary {
  std::vector<LossRecord> series;  // sorted by step
  double initial = 0.0;
  double plateau_mean = 0.0;
  double plateau_std = 0.0;  // population
  std::size_t plateau_count = 0;
  bool diverged = false;  // plateau_mean > initial
};

/// The plateau is every record whose step lies in the final half of the step
/// range, i.e. step >= (first + last) / 2. Throws invalid-argument on fewer than
/// two records or non-finite values.
LossSummary summarize_loss(std::vector<LossRecord> records);

/// Parses "step,loss" CSV, or a TensorBoard scalar export ("Wall time,Step,Value").
/// A header row is optional for the two-column form. Throws parse-error naming the
/// offending line.
std::vector<LossRecord> read_loss_csv(std::string_view text);

LossSummary parse_loss_log(std::string_view csv_text);

nlohmann::json to_json(const LossSummary& summary, bool include_series = false);

}  // namespace upscaler::dataset
