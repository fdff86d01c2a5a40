#include "upscaler/gateway/gateway.hpp"

#include <algorithm>

#include "upscaler/error.hpp"
#include "upscaler/imaging/codec.hpp"

namespace upscaler::gateway {

using nlohmann::json;

struct Gateway::Slot {
  explicit Slot(BackendDescriptor d, std::size_t ring_capacity) : descriptor(std::move(d)), ring(ring_capacity) {}

  mutable std::mutex mu;
  std::condition_variable cv;
  BackendDescriptor descriptor;
  int in_flight = 0;
  int peak = 0;
  TelemetryRing ring;
};

json to_json(const BackendStatus& s) {
  json out = to_json(s.descriptor);
  out["in_flight"] = s.in_flight;
  out["peak_in_flight"] = s.peak_in_flight;
  out["telemetry_gaps"] = s.telemetry_gaps;
  out["latest"] = s.latest ? to_json(*s.latest) : json(nullptr);
  return out;
}

Gateway::Gateway(GatewayOptions options) : options_(std::move(options)) {
  validate(options_.vram);
  if (!options_.transport) {
    const auto timeout = options_.timeout;
    options_.transport = [timeout](const std::string& endpoint) { return make_http_transport(endpoint, timeout); };
  }
}

Gateway::~Gateway() { stop_polling(); }

void Gateway::add_backend(BackendDescriptor backend) {
  validate(backend);
  std::lock_guard lock(registry_mu_);
  if (slots_.count(backend.id)) throw_error(ErrorCode::config_error, "duplicate backend id '" + backend.id + "'");
  auto id = backend.id;
  slots_.emplace(std::move(id), std::make_unique<Slot>(std::move(backend), options_.telemetry_capacity));
}

Gateway::Slot& Gateway::slot(const std::string& id) const {
  std::lock_guard lock(registry_mu_);
  auto it = slots_.find(id);
  if (it == slots_.end()) throw_error(ErrorCode::not_found, "unknown backend '" + id + "'");
  return *it->second;
}

namespace {

BackendStatus status_of(const BackendDescriptor& d, int in_flight, int peak, const TelemetryRing& ring) {
  return {d, in_flight, peak, ring.gaps(), ring.latest()};
}

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string error_message(const HttpResponse& res) {
  try {
    auto doc = json::parse(res.body);
    return doc.value("code", std::string("error")) + ": " + doc.value("message", std::string());
  } catch (const json::exception&) {
    return "HTTP " + std::to_string(res.status);
  }
}

}  // namespace

std::vector<BackendStatus> Gateway::backends() const {
  std::vector<BackendStatus> out;
  std::lock_guard lock(registry_mu_);
  for (const auto& [id, s] : slots_) {
    std::lock_guard slot_lock(s->mu);
    out.push_back(status_of(s->descriptor, s->in_flight, s->peak, s->ring));
  }
  return out;
}

BackendStatus Gateway::backend(const std::string& id) const {
  auto& s = slot(id);
  std::lock_guard lock(s.mu);
  return status_of(s.descriptor, s.in_flight, s.peak, s.ring);
}

AdmissionDecision Gateway::check(const InferenceRequest& request, const std::string& backend_id) const {
  auto& s = slot(backend_id);
  std::lock_guard lock(s.mu);
  return admission_check(request.kind, request.lora.has_value(), s.descriptor, s.in_flight, options_.vram);
}

InferenceResult Gateway::submit(const InferenceRequest& request, const std::string& backend_id) {
  if (auto problems = gateway::check(request); !problems.empty()) {
    throw_error(ErrorCode::request_error, "invalid request: " + problems.front(), problems);
  }
  auto& s = slot(backend_id);
  std::string endpoint;
  {
    std::unique_lock lock(s.mu);
    const auto deadline = std::chrono::steady_clock::now() + options_.queue_timeout;
    for (;;) {
      auto decision = admission_check(request.kind, request.lora.has_value(), s.descriptor, s.in_flight, options_.vram);
      if (decision.verdict == Verdict::reject) throw_error(ErrorCode::admission_rejected, decision.reason);
      if (decision.verdict == Verdict::admit) break;
      if (s.cv.wait_until(lock, deadline) == std::cv_status::timeout) {
        throw_error(ErrorCode::admission_rejected, "timed out waiting in queue: " + decision.reason);
      }
    }
    ++s.in_flight;
    s.peak = std::max(s.peak, s.in_flight);
    endpoint = s.descriptor.endpoint;
  }
  struct Release {
    Slot& s;
    ~Release() {
      {
        std::lock_guard lock(s.mu);
        --s.in_flight;
      }
      s.cv.notify_all();
    }
  } release{s};

  const std::string body = to_json(request).dump();
  const auto started = std::chrono::steady_clock::now();
  HttpResponse res;
  std::string last_failure;
  bool delivered = false;
  auto backoff = options_.backoff;
  for (int attempt = 0; attempt <= options_.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    try {
      res = options_.transport(endpoint)->post_json(kInferPath, body);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::transport_error) throw;
      last_failure = e.what();
      continue;
    }
    if (res.status >= 500) {
      last_failure = "backend returned " + error_message(res);
      continue;
    }
    delivered = true;
    break;
  }
  if (!delivered) {
    {
      std::lock_guard lock(s.mu);
      if (s.descriptor.health == Health::up) s.descriptor.health = Health::degraded;
    }
    throw_error(ErrorCode::transport_error, "backend '" + backend_id + "' failed after " +
                                                std::to_string(options_.retries + 1) + " attempts: " + last_failure);
  }
  if (res.status >= 400) throw_error(ErrorCode::request_error, "backend rejected request: " + error_message(res));
  if (res.status != 200) throw_error(ErrorCode::protocol_error, "unexpected HTTP status " + std::to_string(res.status));

  json doc;
  try {
    doc = json::parse(res.body);
  } catch (const json::exception& e) {
    throw_error(ErrorCode::protocol_error, std::string("response is not JSON: ") + e.what());
  }
  auto response = response_from_json(doc);
  if (static_cast<int>(response.images.size()) != request.num_images) {
    throw_error(ErrorCode::protocol_error, "expected " + std::to_string(request.num_images) + " images, got " +
                                               std::to_string(response.images.size()));
  }
  InferenceResult out;
  for (auto& img : response.images) {
    try {
      (void)imaging::load_image(img);
    } catch (const Error& e) {
      throw_error(ErrorCode::protocol_error, std::string("response image does not decode: ") + e.what());
    }
    out.hashes.push_back(sha256_hex(img));
    out.images.push_back(std::move(img));
  }
  out.seed_used = response.seed_used;
  out.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  out.backend_id = backend_id;
  {
    std::lock_guard lock(s.mu);
    if (s.descriptor.health == Health::degraded && s.ring.consecutive_failures() < options_.failure_threshold) {
      s.descriptor.health = Health::up;
    }
  }
  return out;
}

InferenceResult Gateway::infer(const InferenceRequest& request) {
  std::vector<std::string> ids;
  {
    std::lock_guard lock(registry_mu_);
    for (const auto& [id, s] : slots_) ids.push_back(id);
  }
  std::optional<std::string> admit, queue;
  std::vector<std::string> reasons;
  for (const auto& id : ids) {
    auto decision = check(request, id);
    if (decision.verdict == Verdict::admit && !admit) admit = id;
    if (decision.verdict == Verdict::queue && !queue) queue = id;
    if (decision.verdict == Verdict::reject) reasons.push_back(decision.reason);
  }
  if (admit) return submit(request, *admit);
  if (queue) return submit(request, *queue);
  throw_error(ErrorCode::admission_rejected,
              "no backend can serve a " + std::string(to_string(request.kind)) + " request", reasons);
}

bool Gateway::poll_telemetry(const std::string& backend_id) {
  auto& s = slot(backend_id);
  std::string endpoint;
  {
    std::lock_guard lock(s.mu);
    endpoint = s.descriptor.endpoint;
  }
  try {
    auto res = options_.transport(endpoint)->get(kMetricsPath);
    if (res.status != 200) throw_error(ErrorCode::protocol_error, "metrics HTTP " + std::to_string(res.status));
    s.ring.push(sample_from_json(json::parse(res.body), now_ms()));
    return true;
  } catch (const std::exception&) {
    const int failures = s.ring.record_gap();
    if (failures >= options_.failure_threshold) {
      std::lock_guard lock(s.mu);
      if (s.descriptor.health == Health::up) s.descriptor.health = Health::degraded;
    }
    return false;
  }
}

std::vector<GpuSample> Gateway::telemetry(const std::string& backend_id) const { return slot(backend_id).ring.snapshot(); }

void Gateway::start_polling(std::chrono::milliseconds period) {
  std::lock_guard lock(poll_mu_);
  if (polling_) return;
  polling_ = true;
  poller_ = std::thread([this, period] {
    std::unique_lock lock(poll_mu_);
    while (polling_) {
      lock.unlock();
      std::vector<std::string> ids;
      {
        std::lock_guard registry(registry_mu_);
        for (const auto& [id, s] : slots_) ids.push_back(id);
      }
      for (const auto& id : ids) poll_telemetry(id);
      lock.lock();
      poll_cv_.wait_for(lock, period, [this] { return !polling_; });
    }
  });
}

void Gateway::stop_polling() {
  {
    std::lock_guard lock(poll_mu_);
    if (!polling_) return;
    polling_ = false;
  }
  poll_cv_.notify_all();
  if (poller_.joinable()) poller_.join();
}

}  // namespace upscaler::gateway
