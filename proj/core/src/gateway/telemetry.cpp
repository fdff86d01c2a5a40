#include "upscaler/gateway/telemetry.hpp"

#include <algorithm>

#include "upscaler/error.hpp"

namespace upscaler::gateway {

GpuSample sample_from_json(const nlohmann::json& doc, std::int64_t timestamp_ms) {
  GpuSample s;
  s.timestamp_ms = timestamp_ms;
  try {
    s.memory_used_gb = doc.at("memory_used_gb").get<double>();
    s.temperature_c = doc.at("temperature_c").get<double>();
    s.power_w = doc.at("power_w").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorCode::protocol_error, std::string("malformed metrics body: ") + e.what());
  }
  if (s.memory_used_gb < 0 || s.temperature_c < 0 || s.power_w < 0) {
    throw_error(ErrorCode::protocol_error, "metrics values must be nonnegative");
  }
  return s;
}

nlohmann::json to_json(const GpuSample& s) {
  return {{"timestamp_ms", s.timestamp_ms},
          {"memory_used_gb", s.memory_used_gb},
          {"temperature_c", s.temperature_c},
          {"power_w", s.power_w}};
}

TelemetryRing::TelemetryRing(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

void TelemetryRing::push(GpuSample sample) {
  std::lock_guard lock(mu_);
  if (!samples_.empty()) sample.timestamp_ms = std::max(sample.timestamp_ms, samples_.back().timestamp_ms + 1);
  samples_.push_back(sample);
  while (samples_.size() > capacity_) samples_.pop_front();
  consecutive_failures_ = 0;
}

int TelemetryRing::record_gap() {
  std::lock_guard lock(mu_);
  ++gaps_;
  return ++consecutive_failures_;
}

std::vector<GpuSample> TelemetryRing::snapshot() const {
  std::lock_guard lock(mu_);
  return {samples_.begin(), samples_.end()};
}

std::optional<GpuSample> TelemetryRing::latest() const {
  std::lock_guard lock(mu_);
  if (samples_.empty()) return std::nullopt;
  return samples_.back();
}

std::size_t TelemetryRing::size() const {
  std::lock_guard lock(mu_);
  return samples_.size();
}

std::uint64_t TelemetryRing::gaps() const {
  std::lock_guard lock(mu_);
  return gaps_;
}

int TelemetryRing::consecutive_failures() const {
  std::lock_guard lock(mu_);
  return consecutive_failures_;
}

}  // namespace upscaler::gateway
