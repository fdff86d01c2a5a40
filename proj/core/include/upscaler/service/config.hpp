#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "upscaler/dataset/training.hpp"
#include "upscaler/gateway/admission.hpp"
#include "upscaler/pipeline/engine.hpp"

namespace upscaler::service {

// Service configuration, a JSON document (see docs/config.md). Every key is optional.
struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::filesystem::path store = "upscaler-store";
  std::vector<gateway::BackendDescriptor> backends;
  gateway::VramModel vram;
  int telemetry_period_ms = 1000;  // 0 disables polling
  int retries = 2;
  int backoff_ms = 50;
  int request_timeout_ms = 120000;
  pipeline::JobSpec job_defaults;
  std::string lora_name = "football_lora";
  dataset::TrainRunConfig training;  // checked at startup; problems become warnings
};

/// Throws config-error on malformed values.
ServiceConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ServiceConfig& cfg);
/// Reads and parses a config file. Throws io-error / config-error.
ServiceConfig load_config(const std::filesystem::path& path);

using EnvLookup = std::function<std::optional<std::string>(const char*)>;
EnvLookup process_env();

/// UPSCALER_STORE replaces the store path. UPSCALER_BACKENDS replaces the backend
/// registry: a JSON array of descriptors, or "@<path>" naming a file holding one.
void apply_env(ServiceConfig& cfg, const EnvLookup& env = process_env());

/// Non-fatal findings surfaced at startup (e.g. a training default with alpha > dim).
std::vector<std::string> startup_warnings(const ServiceConfig& cfg);

}  // namespace upscaler::service
