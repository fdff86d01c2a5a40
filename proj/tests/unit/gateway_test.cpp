#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "test_support.hpp"
#include "upscaler/error.hpp"
#include "upscaler/gateway/gateway.hpp"
#include "upscaler/gateway/mock_backend.hpp"
#include "upscaler/imaging/codec.hpp"

using namespace upscaler;
using namespace upscaler::gateway;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::io_error;
}

const std::set<Capability> kAllCaps{Capability::img2img, Capability::controlnet, Capability::lora};

BackendDescriptor backend(double gb, std::string endpoint = "http://127.0.0.1:1", std::string id = "b") {
  BackendDescriptor b;
  b.id = std::move(id);
  b.endpoint = std::move(endpoint);
  b.declared_vram_gb = gb;
  b.capabilities = kAllCaps;
  b.max_in_flight = 2;
  return b;
}

InferenceRequest img2img_request(int side = 16, double strength = 0.75) {
  InferenceRequest r;
  r.kind = RequestKind::img2img;
  r.model_id = "black-forest-labs/FLUX.1-dev";
  r.prompt = "a player";
  r.image = imaging::save_png(test::random_image(side, side, 4));
  r.strength = strength;
  r.num_inference_steps = 80;
  r.guidance_scale = 3.5;
  r.seed = 5;
  r.num_images = 3;
  r.width = r.height = side;
  return r;
}

InferenceRequest controlnet_request(int side = 16) {
  auto r = img2img_request(side);
  r.kind = RequestKind::controlnet;
  r.strength.reset();
  r.conditioning_scale = 0.5;
  r.num_inference_steps = 35;
  return r;
}

double mad(const imaging::ImageBuffer& a, const imaging::ImageBuffer& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.pixels().size(); ++i) s += std::fabs(a.pixels()[i] - b.pixels()[i]);
  return s / static_cast<double>(a.pixels().size());
}

GatewayOptions fast_options() {
  GatewayOptions o;
  o.backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::milliseconds(5000);
  o.queue_timeout = std::chrono::milliseconds(5000);
  return o;
}

}  // namespace

TEST(Admission, ExhaustiveOverDeclaredVram) {
  const VramModel model;
  for (double gb : {16.0, 24.0, 30.0, 48.0})
    for (auto kind : {RequestKind::img2img, RequestKind::controlnet})
      for (bool lora : {false, true}) {
        const double need = kind == RequestKind::img2img ? 24.0 : 30.0;
        const auto d = admission_check(kind, lora, backend(gb), 0, model);
        EXPECT_EQ(d.verdict, gb >= need ? Verdict::admit : Verdict::reject)
            << gb << " GB " << to_string(kind) << (lora ? " +lora" : "");
        if (d.verdict == Verdict::reject) EXPECT_FALSE(d.reason.empty());
      }
}

TEST(Admission, HeadlineCases) {
  const VramModel model;
  EXPECT_EQ(admission_check(RequestKind::controlnet, false, backend(24), 0, model).verdict, Verdict::reject);
  EXPECT_EQ(admission_check(RequestKind::controlnet, false, backend(48), 0, model).verdict, Verdict::admit);
  EXPECT_EQ(admission_check(RequestKind::img2img, false, backend(24), 0, model).verdict, Verdict::admit);
}

TEST(Admission, CapabilitiesHealthAndQueueing) {
  const VramModel model;
  auto b = backend(48);
  EXPECT_EQ(admission_check(RequestKind::img2img, false, b, 2, model).verdict, Verdict::queue);
  EXPECT_EQ(admission_check(RequestKind::img2img, false, b, 1, model).verdict, Verdict::admit);
  b.capabilities.erase(Capability::lora);
  EXPECT_EQ(admission_check(RequestKind::img2img, true, b, 0, model).verdict, Verdict::reject);
  EXPECT_EQ(admission_check(RequestKind::img2img, false, b, 0, model).verdict, Verdict::admit);
  b.capabilities.erase(Capability::controlnet);
  EXPECT_EQ(admission_check(RequestKind::controlnet, false, b, 0, model).verdict, Verdict::reject);
  b.health = Health::down;
  EXPECT_EQ(admission_check(RequestKind::img2img, false, b, 0, model).verdict, Verdict::reject);
  b.health = Health::degraded;
  EXPECT_EQ(admission_check(RequestKind::img2img, false, b, 0, model).verdict, Verdict::admit);
}

TEST(Admission, DescriptorValidationAndJson) {
  EXPECT_EQ(code_of([] { validate(backend(0)); }), ErrorCode::config_error);
  auto b = backend(48);
  b.max_in_flight = 0;
  EXPECT_EQ(code_of([&] { validate(b); }), ErrorCode::config_error);
  const auto good = backend(30);
  EXPECT_EQ(to_json(backend_from_json(to_json(good))), to_json(good));
  VramModel m;
  m.stage2_total_gb = 32;
  EXPECT_EQ(vram_model_from_json(to_json(m)).stage2_total_gb, 32.0);
}

TEST(Wire, RoundTripAndImageKeys) {
  auto r = img2img_request();
  r.lora = LoraAttachment{"football_lora", 0.9};
  const auto doc = to_json(r);
  EXPECT_TRUE(doc.contains("init_image"));
  EXPECT_FALSE(doc.contains("control_image"));
  EXPECT_EQ(request_from_json(doc), r);
  const auto c = controlnet_request();
  const auto cdoc = to_json(c);
  EXPECT_TRUE(cdoc.contains("control_image"));
  EXPECT_EQ(request_from_json(cdoc), c);
}

TEST(Wire, StructuralChecks) {
  EXPECT_TRUE(check(img2img_request()).empty());
  auto r = img2img_request();
  r.strength.reset();
  r.conditioning_scale = 0.5;
  EXPECT_EQ(check(r).size(), 2u);
  auto c = controlnet_request();
  c.image.clear();
  c.num_images = 0;
  EXPECT_EQ(check(c).size(), 2u);
  EXPECT_EQ(code_of([] { request_from_json({{"kind", "img2img"}}); }), ErrorCode::request_error);
  EXPECT_EQ(code_of([] { response_from_json({{"images", 3}}); }), ErrorCode::protocol_error);
}

TEST(Wire, FingerprintIgnoresImage) {
  auto a = img2img_request();
  auto b = a;
  b.image = imaging::save_png(test::random_image(16, 16, 99));
  EXPECT_EQ(parameter_fingerprint(a), parameter_fingerprint(b));
  b.seed = 6;
  EXPECT_NE(parameter_fingerprint(a), parameter_fingerprint(b));
}

TEST(Wire, Base64RoundTrip) {
  Rng rng(1);
  for (int n = 0; n < 40; ++n) {
    Bytes data(static_cast<std::size_t>(n));
    for (auto& v : data) v = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    EXPECT_EQ(base64_decode(base64_encode(data)), data);
  }
  EXPECT_EQ(base64_encode(Bytes{'f', 'o', 'o'}), "Zm9v");
  EXPECT_EQ(code_of([] { base64_decode("@@@@"); }), ErrorCode::decode_error);
}

TEST(Telemetry, RingEvictsOldestAndOrdersTimestamps) {
  TelemetryRing ring(3);
  for (int i = 0; i < 5; ++i) ring.push({100, static_cast<double>(i), 50, 100});
  const auto snap = ring.snapshot();
  ASSERT_EQ(snap.size(), 3u);
  EXPECT_EQ(snap.front().memory_used_gb, 2.0);
  for (std::size_t i = 1; i < snap.size(); ++i) EXPECT_GT(snap[i].timestamp_ms, snap[i - 1].timestamp_ms);
  EXPECT_EQ(ring.record_gap(), 1);
  EXPECT_EQ(ring.record_gap(), 2);
  ring.push({0, 1, 1, 1});
  EXPECT_EQ(ring.consecutive_failures(), 0);
  EXPECT_EQ(ring.gaps(), 2u);
}

TEST(Telemetry, SampleParsing) {
  EXPECT_EQ(sample_from_json({{"memory_used_gb", 20}, {"temperature_c", 60}, {"power_w", 200}}, 7).timestamp_ms, 7);
  EXPECT_EQ(code_of([] { sample_from_json({{"memory_used_gb", 20}}, 0); }), ErrorCode::protocol_error);
  EXPECT_EQ(code_of([] { sample_from_json({{"memory_used_gb", -1}, {"temperature_c", 1}, {"power_w", 1}}, 0); }),
            ErrorCode::protocol_error);
  for (std::uint64_t t = 0; t < 50; ++t) {
    const auto s = sample_from_json(mock_metrics(t), 0);
    EXPECT_GE(s.memory_used_gb, 18);
    EXPECT_LE(s.memory_used_gb, 46);
    EXPECT_GE(s.temperature_c, 40);
    EXPECT_LE(s.power_w, 300);
  }
}

TEST(MockInfer, DeterministicAndSeedSensitive) {
  const auto r = img2img_request();
  const auto a = mock_infer(r);
  EXPECT_EQ(a.images, mock_infer(r).images);
  ASSERT_EQ(a.images.size(), 3u);
  EXPECT_NE(a.images[0], a.images[1]);
  auto other = r;
  other.seed = 6;
  EXPECT_NE(mock_infer(other).images[0], a.images[0]);
  auto big = r;
  big.width = big.height = 40;
  const auto img = imaging::load_image(mock_infer(big).images[0]);
  EXPECT_EQ(img.width(), 40);
}

TEST(MockInfer, ZeroStrengthReturnsTheSource) {
  const auto r = img2img_request(16, 0.0);
  const auto src = imaging::load_image(r.image);
  for (const auto& png : mock_infer(r).images) EXPECT_EQ(mad(imaging::load_image(png), src), 0.0);
}

TEST(MockInfer, DeviationGrowsWithStrength) {
  const auto src = imaging::load_image(img2img_request().image);
  double prev = -1;
  for (double w : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto d = mad(imaging::load_image(mock_infer(img2img_request(16, w)).images[0]), src);
    EXPECT_GT(d, prev) << w;
    prev = d;
  }
}

TEST(MockInfer, MalformedRequests) {
  auto r = img2img_request();
  r.prompt.clear();
  EXPECT_EQ(code_of([&] { mock_infer(r); }), ErrorCode::request_error);
  auto junk = img2img_request();
  junk.image = {1, 2, 3};
  EXPECT_EQ(code_of([&] { mock_infer(junk); }), ErrorCode::decode_error);
}

TEST(MockClient, RecordsAndFailsOnDemand) {
  MockClient client;
  auto r = img2img_request();
  r.lora = LoraAttachment{"x", 0.9};
  client.fail_lora_branch(1);
  EXPECT_EQ(code_of([&] { client.infer(r); }), ErrorCode::transport_error);
  const auto res = client.infer(r);
  EXPECT_EQ(res.hashes.size(), 3u);
  EXPECT_EQ(res.hashes[0], sha256_hex(res.images[0]));
  EXPECT_EQ(client.received().size(), 2u);
}

class GatewayLive : public ::testing::Test {
 protected:
  void SetUp() override { server.start(); }
  void TearDown() override { server.stop(); }

  MockBackendServer server;
};

TEST_F(GatewayLive, SubmitReturnsCheckedImages) {
  Gateway gw(fast_options());
  gw.add_backend(backend(48, server.endpoint()));
  const auto r = img2img_request();
  const auto res = gw.submit(r, "b");
  EXPECT_EQ(res.images, mock_infer(r).images);
  EXPECT_EQ(res.backend_id, "b");
  EXPECT_EQ(res.seed_used, 5u);
  ASSERT_EQ(server.received().size(), 1u);
  EXPECT_EQ(server.received()[0], r);
  EXPECT_EQ(gw.infer(controlnet_request()).images.size(), 3u);
}

TEST_F(GatewayLive, RetriesTransientFailures) {
  Gateway gw(fast_options());
  gw.add_backend(backend(48, server.endpoint()));
  server.set_faults({.fail_next = 2, .fail_status = 503});
  EXPECT_EQ(gw.submit(img2img_request(), "b").images.size(), 3u);
  EXPECT_EQ(server.infer_calls(), 3u);
  EXPECT_EQ(gw.backend("b").descriptor.health, Health::up);
}

TEST_F(GatewayLive, ExhaustedRetriesDegradeThenRecover) {
  Gateway gw(fast_options());
  gw.add_backend(backend(48, server.endpoint()));
  server.set_faults({.fail_next = 3});
  EXPECT_EQ(code_of([&] { gw.submit(img2img_request(), "b"); }), ErrorCode::transport_error);
  EXPECT_EQ(gw.backend("b").descriptor.health, Health::degraded);
  EXPECT_EQ(gw.submit(img2img_request(), "b").images.size(), 3u);
  EXPECT_EQ(gw.backend("b").descriptor.health, Health::up);
}

TEST_F(GatewayLive, ClientErrorsAreNotRetried) {
  Gateway gw(fast_options());
  gw.add_backend(backend(48, server.endpoint()));
  server.set_faults({.fail_next = 1, .fail_status = 422});
  EXPECT_EQ(code_of([&] { gw.submit(img2img_request(), "b"); }), ErrorCode::request_error);
  EXPECT_EQ(server.infer_calls(), 1u);
}

TEST_F(GatewayLive, ShortImageListIsAProtocolError) {
  Gateway gw(fast_options());
  gw.add_backend(backend(48, server.endpoint()));
  server.set_faults({.drop_images = 1});
  EXPECT_EQ(code_of([&] { gw.submit(img2img_request(), "b"); }), ErrorCode::protocol_error);
}

TEST_F(GatewayLive, AdmissionGatesRouting) {
  Gateway gw(fast_options());
  gw.add_backend(backend(24, server.endpoint(), "small"));
  EXPECT_EQ(code_of([&] { gw.submit(controlnet_request(), "small"); }), ErrorCode::admission_rejected);
  EXPECT_EQ(code_of([&] { gw.infer(controlnet_request()); }), ErrorCode::admission_rejected);
  EXPECT_EQ(server.infer_calls(), 0u);
  gw.add_backend(backend(48, server.endpoint(), "tall"));
  EXPECT_EQ(gw.infer(controlnet_request()).backend_id, "tall");
  EXPECT_EQ(gw.infer(img2img_request()).backend_id, "small");
  EXPECT_EQ(code_of([&] { gw.add_backend(backend(48, server.endpoint(), "tall")); }), ErrorCode::config_error);
  EXPECT_EQ(code_of([&] { gw.backend("nope"); }), ErrorCode::not_found);
  EXPECT_EQ(gw.check(controlnet_request(), "small").verdict, Verdict::reject);
}

TEST_F(GatewayLive, InFlightLimitIsNeverExceeded) {
  Gateway gw(fast_options());
  auto b = backend(48, server.endpoint());
  b.max_in_flight = 1;
  gw.add_backend(b);
  server.set_faults({.delay = std::chrono::milliseconds(30)});
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (int i = 0; i < 4; ++i)
    threads.emplace_back([&] {
      if (gw.submit(img2img_request(), "b").images.size() == 3) ++ok;
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok, 4);
  EXPECT_EQ(gw.backend("b").peak_in_flight, 1);
  EXPECT_EQ(gw.backend("b").in_flight, 0);
}

TEST_F(GatewayLive, TelemetryPollsAndGaps) {
  auto opts = fast_options();
  opts.failure_threshold = 2;
  Gateway gw(opts);
  gw.add_backend(backend(48, server.endpoint()));
  EXPECT_TRUE(gw.poll_telemetry("b"));
  EXPECT_TRUE(gw.poll_telemetry("b"));
  EXPECT_EQ(gw.telemetry("b").size(), 2u);
  server.set_faults({.fail_metrics = true});
  EXPECT_FALSE(gw.poll_telemetry("b"));
  EXPECT_EQ(gw.backend("b").descriptor.health, Health::up);
  EXPECT_FALSE(gw.poll_telemetry("b"));
  EXPECT_EQ(gw.backend("b").descriptor.health, Health::degraded);
  EXPECT_EQ(gw.backend("b").telemetry_gaps, 2u);
}

TEST(GatewayOffline, UnreachableBackendIsATransportError) {
  MockBackendServer probe;
  probe.start();
  const auto endpoint = probe.endpoint();
  probe.stop();
  Gateway gw(fast_options());
  gw.add_backend(backend(48, endpoint));
  EXPECT_EQ(code_of([&] { gw.submit(img2img_request(), "b"); }), ErrorCode::transport_error);
  EXPECT_FALSE(gw.poll_telemetry("b"));
}
