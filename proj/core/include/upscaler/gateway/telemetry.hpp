#pragma once

#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

namespace upscaler::gateway {

struct GpuSample {
  std::int64_t timestamp_ms = 0;
  double memory_used_gb = 0.0;
  double temperature_c = 0.0;
  double power_w = 0.0;
};

/// Throws protocol-error if a field is missing or negative.
GpuSample sample_from_json(const nlohmann::json& doc, std::int64_t timestamp_ms);
nlohmann::json to_json(const GpuSample& sample);

// Bounded per-backend history. Oldest samples are evicted first; failed polls
// are counted as gaps. Thread-safe.
class TelemetryRing {
 public:
  explicit TelemetryRing(std::size_t capacity = 1000);

  /// Timestamps are forced strictly increasing.
  void push(GpuSample sample);
  /// Returns the consecutive-failure count after recording the gap.
  int record_gap();

  std::vector<GpuSample> snapshot() const;
  std::optional<GpuSample> latest() const;
  std::size_t size() const;
  std::size_t capacity() const noexcept { return capacity_; }
  std::uint64_t gaps() const;
  int consecutive_failures() const;

 private:
  mutable std::mutex mu_;
  std::size_t capacity_;
  std::deque<GpuSample> samples_;
  std::uint64_t gaps_ = 0;
  int consecutive_failures_ = 0;
};

}  // namespace upscaler::gateway
