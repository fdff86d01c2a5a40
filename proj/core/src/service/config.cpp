#include "upscaler/service/config.hpp"

#include <cstdlib>

#include "upscaler/error.hpp"
#include "upscaler/imaging/codec.hpp"

namespace upscaler::service {

using nlohmann::json;

namespace {

std::vector<gateway::BackendDescriptor> backends_from(const json& doc) {
  if (!doc.is_array()) throw_error(ErrorCode::config_error, "backends must be a JSON array");
  std::vector<gateway::BackendDescriptor> out;
  for (const auto& b : doc) out.push_back(gateway::backend_from_json(b));
  return out;
}

json parse_text(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw_error(ErrorCode::config_error, what + " is not valid JSON (byte " + std::to_string(e.byte) + ")");
  }
}

}  // namespace

ServiceConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw_error(ErrorCode::config_error, "service config must be a JSON object");
  ServiceConfig c;
  try {
    c.host = doc.value("host", c.host);
    c.port = doc.value("port", c.port);
    if (doc.contains("store")) c.store = doc["store"].get<std::string>();
    if (doc.contains("backends")) c.backends = backends_from(doc["backends"]);
    if (doc.contains("vram")) c.vram = gateway::vram_model_from_json(doc["vram"]);
    c.telemetry_period_ms = doc.value("telemetry_period_ms", c.telemetry_period_ms);
    c.retries = doc.value("retries", c.retries);
    c.backoff_ms = doc.value("backoff_ms", c.backoff_ms);
    c.request_timeout_ms = doc.value("request_timeout_ms", c.request_timeout_ms);
    c.lora_name = doc.value("lora_name", c.lora_name);
    if (doc.contains("stage1")) c.job_defaults.stage1 = pipeline::stage1_from_json(doc["stage1"]);
    if (doc.contains("stage2")) c.job_defaults.stage2 = pipeline::stage2_from_json(doc["stage2"]);
    if (doc.contains("branches")) {
      const auto& b = doc["branches"];
      if (b.contains("stage1")) c.job_defaults.stage1_branches = pipeline::branches_from_json(b["stage1"]);
      if (b.contains("stage2")) c.job_defaults.stage2_branches = pipeline::branches_from_json(b["stage2"]);
    }
    if (doc.contains("training")) c.training = dataset::train_config_from_json(doc["training"]);
  } catch (const json::exception& e) {
    throw_error(ErrorCode::config_error, std::string("malformed service config: ") + e.what());
  }
  std::vector<std::string> problems;
  if (c.port < 0 || c.port > 65535) problems.push_back("port: must be in [0, 65535]");
  if (c.telemetry_period_ms < 0) problems.push_back("telemetry_period_ms: must be >= 0");
  if (c.retries < 0) problems.push_back("retries: must be >= 0");
  if (c.backoff_ms < 0) problems.push_back("backoff_ms: must be >= 0");
  if (c.request_timeout_ms < 1) problems.push_back("request_timeout_ms: must be >= 1");
  if (c.store.empty()) problems.push_back("store: must not be empty");
  if (!problems.empty()) throw_error(ErrorCode::config_error, "invalid service config", problems);
  return c;
}

json to_json(const ServiceConfig& c) {
  json backends = json::array();
  for (const auto& b : c.backends) backends.push_back(gateway::to_json(b));
  return {{"host", c.host},
          {"port", c.port},
          {"store", c.store.string()},
          {"backends", backends},
          {"vram", gateway::to_json(c.vram)},
          {"telemetry_period_ms", c.telemetry_period_ms},
          {"retries", c.retries},
          {"backoff_ms", c.backoff_ms},
          {"request_timeout_ms", c.request_timeout_ms},
          {"lora_name", c.lora_name},
          {"stage1", pipeline::to_json(c.job_defaults.stage1)},
          {"stage2", pipeline::to_json(c.job_defaults.stage2)},
          {"branches",
           {{"stage1", pipeline::to_json(c.job_defaults.stage1_branches)},
            {"stage2", pipeline::to_json(c.job_defaults.stage2_branches)}}},
          {"training", dataset::to_json(c.training)}};
}

ServiceConfig load_config(const std::filesystem::path& path) {
  const auto bytes = imaging::read_file(path);
  return config_from_json(parse_text(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()),
                                     "config file " + path.string()));
}

EnvLookup process_env() {
  return [](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

void apply_env(ServiceConfig& cfg, const EnvLookup& env) {
  if (auto store = env("UPSCALER_STORE"); store && !store->empty()) cfg.store = *store;
  if (auto backends = env("UPSCALER_BACKENDS"); backends && !backends->empty()) {
    std::string text = *backends;
    if (text.front() == '@') {
      const auto bytes = imaging::read_file(text.substr(1));
      text.assign(bytes.begin(), bytes.end());
    }
    cfg.backends = backends_from(parse_text(text, "UPSCALER_BACKENDS"));
  }
}

std::vector<std::string> startup_warnings(const ServiceConfig& cfg) {
  std::vector<std::string> warnings;
  for (const auto& p : dataset::check(cfg.training)) warnings.push_back("training config: " + p);
  if (cfg.backends.empty()) warnings.push_back("no inference backends configured; stage runs will be rejected");
  try {
    for (const auto& w : pipeline::validate_configs(cfg.job_defaults.stage1, cfg.job_defaults.stage2).warnings) {
      warnings.push_back("job defaults: " + w);
    }
  } catch (const Error& e) {
    warnings.push_back(std::string("job defaults: ") + e.what());
  }
  return warnings;
}

}  // namespace upscaler::service
