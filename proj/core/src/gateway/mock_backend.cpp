#include "upscaler/gateway/mock_backend.hpp"

#include <atomic>
#include <thread>

#include <httplib.h>

#include "upscaler/error.hpp"
#include "upscaler/imaging/codec.hpp"
#include "upscaler/imaging/lanczos.hpp"
#include "upscaler/rng.hpp"

namespace upscaler::gateway {

using imaging::ImageBuffer;
using nlohmann::json;

namespace {

// 3x3 box mean with clamp-to-edge borders.
std::vector<float> box3(const std::vector<float>& src, int w, int h) {
  std::vector<float> out(src.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        float sum = 0.0f;
        for (int dy = -1; dy <= 1; ++dy) {
          const int yy = std::clamp(y + dy, 0, h - 1);
          for (int dx = -1; dx <= 1; ++dx) {
            const int xx = std::clamp(x + dx, 0, w - 1);
            sum += src[(static_cast<std::size_t>(yy) * w + xx) * 3 + c];
          }
        }
        out[(static_cast<std::size_t>(y) * w + x) * 3 + c] = sum / 9.0f;
      }
    }
  }
  return out;
}

}  // namespace

InferenceResponse mock_infer(const InferenceRequest& request) {
  if (auto problems = check(request); !problems.empty()) {
    throw_error(ErrorCode::request_error, "invalid request: " + problems.front(), problems);
  }
  ImageBuffer source = imaging::load_image(request.image);
  if (source.width() != request.width || source.height() != request.height) {
    source = imaging::resize(source, {imaging::Kernel::lanczos, 3, request.width, request.height});
  }
  const float w = static_cast<float>(request.kind == RequestKind::img2img ? *request.strength
                                                                          : *request.conditioning_scale);
  const std::uint64_t stream = derive_seed(request.seed, fnv1a64(parameter_fingerprint(request)));
  InferenceResponse out;
  out.seed_used = request.seed;
  const auto base = source.pixels();
  for (int i = 0; i < request.num_images; ++i) {
    Rng rng(derive_seed(stream, static_cast<std::uint64_t>(i)));
    std::vector<float> blended(base.size());
    for (std::size_t k = 0; k < base.size(); ++k) {
      const auto noise = static_cast<float>(rng.uniform());
      blended[k] = (1.0f - w) * base[k] + w * noise;
    }
    if (w > 0.0f) {
      const auto soft = box3(blended, request.width, request.height);
      const float amount = 0.5f * w;
      for (std::size_t k = 0; k < blended.size(); ++k) blended[k] += amount * (blended[k] - soft[k]);
    }
    out.images.push_back(imaging::save_png(ImageBuffer(request.width, request.height, std::move(blended))));
  }
  return out;
}

json mock_metrics(std::uint64_t tick) {
  Rng rng(derive_seed(0x6D6F636B, tick));
  return {{"memory_used_gb", rng.uniform(18.0, 46.0)},
          {"temperature_c", rng.uniform(40.0, 85.0)},
          {"power_w", rng.uniform(80.0, 300.0)}};
}

struct MockBackendServer::Impl {
  httplib::Server server;
  std::thread thread;
  int port = -1;
  mutable std::mutex mu;
  FaultPlan faults;
  std::vector<InferenceRequest> received;
  std::atomic<std::uint64_t> calls{0};
  std::atomic<std::uint64_t> ticks{0};

  Impl() {
    server.Post(kInferPath, [this](const httplib::Request& req, httplib::Response& res) {
      ++calls;
      FaultPlan plan;
      {
        std::lock_guard lock(mu);
        plan = faults;
        if (faults.fail_next > 0) --faults.fail_next;
      }
      if (plan.delay.count() > 0) std::this_thread::sleep_for(plan.delay);
      if (plan.fail_next > 0) {
        res.status = plan.fail_status;
        res.set_content(error_body("injected-fault", "fault injected by test plan").dump(), "application/json");
        return;
      }
      try {
        auto request = request_from_json(json::parse(req.body));
        {
          std::lock_guard lock(mu);
          received.push_back(request);
        }
        auto response = mock_infer(request);
        for (int d = 0; d < plan.drop_images && !response.images.empty(); ++d) response.images.pop_back();
        res.set_content(to_json(response).dump(), "application/json");
      } catch (const json::exception& e) {
        res.status = 400;
        res.set_content(error_body("request-error", e.what()).dump(), "application/json");
      } catch (const Error& e) {
        res.status = 400;
        res.set_content(error_body(to_string(e.code()), e.what()).dump(), "application/json");
      }
    });
    server.Get(kMetricsPath, [this](const httplib::Request&, httplib::Response& res) {
      bool fail = false;
      {
        std::lock_guard lock(mu);
        fail = faults.fail_metrics;
      }
      if (fail) {
        res.status = 503;
        res.set_content(error_body("unavailable", "metrics disabled").dump(), "application/json");
        return;
      }
      res.set_content(mock_metrics(ticks++).dump(), "application/json");
    });
  }
};

MockBackendServer::MockBackendServer() : impl_(std::make_unique<Impl>()) {}

MockBackendServer::~MockBackendServer() { stop(); }

void MockBackendServer::start() {
  if (impl_->thread.joinable()) return;
  impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  if (impl_->port < 0) throw_error(ErrorCode::io_error, "mock backend could not bind a port");
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void MockBackendServer::stop() {
  if (!impl_->thread.joinable()) return;
  impl_->server.stop();
  impl_->thread.join();
}

int MockBackendServer::port() const noexcept { return impl_->port; }

std::string MockBackendServer::endpoint() const { return "http://127.0.0.1:" + std::to_string(impl_->port); }

void MockBackendServer::set_faults(const FaultPlan& plan) {
  std::lock_guard lock(impl_->mu);
  impl_->faults = plan;
}

std::uint64_t MockBackendServer::infer_calls() const { return impl_->calls.load(); }

std::vector<InferenceRequest> MockBackendServer::received() const {
  std::lock_guard lock(impl_->mu);
  return impl_->received;
}

InferenceResult MockClient::infer(const InferenceRequest& request) {
  {
    std::lock_guard lock(mu_);
    received_.push_back(request);
    int& budget = request.lora ? fail_lora_ : fail_plain_;
    if (budget > 0) {
      --budget;
      throw_error(ErrorCode::transport_error, "injected branch failure");
    }
  }
  const auto started = std::chrono::steady_clock::now();
  auto response = mock_infer(request);
  InferenceResult out;
  for (auto& img : response.images) {
    out.hashes.push_back(sha256_hex(img));
    out.images.push_back(std::move(img));
  }
  out.seed_used = response.seed_used;
  out.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  out.backend_id = "in-process-mock";
  return out;
}

std::vector<InferenceRequest> MockClient::received() const {
  std::lock_guard lock(mu_);
  return received_;
}

}  // namespace upscaler::gateway
