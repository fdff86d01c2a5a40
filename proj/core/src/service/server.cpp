#include "upscaler/service/server.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "upscaler/degrade/fixture.hpp"
#include "upscaler/imaging/codec.hpp"
#include "upscaler/metrics/metrics.hpp"
#include "upscaler/prompt/prompt.hpp"
#include "upscaler/service/blob_store.hpp"
#include "upscaler/service/job_store.hpp"

namespace upscaler::service {

using nlohmann::json;

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::decode_error:
    case ErrorCode::parse_error:
    case ErrorCode::request_error: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::precondition_failed: return 409;
    case ErrorCode::validation_error:
    case ErrorCode::config_error: return 422;
    case ErrorCode::transport_error:
    case ErrorCode::protocol_error: return 502;
    case ErrorCode::admission_rejected: return 503;
    case ErrorCode::io_error: return 500;
  }
  return 500;
}

json error_json(const Error& e) {
  return {{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"details", e.details()}};
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) { send_json(res, error_json(e), http_status(e.code())); }

json parse_body(const httplib::Request& req, bool allow_empty = true) {
  if (req.body.empty()) {
    if (allow_empty) return json::object();
    throw_error(ErrorCode::parse_error, "request body is empty");
  }
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw_error(ErrorCode::parse_error, "body is not JSON (byte " + std::to_string(e.byte) + ")");
  }
}

Bytes decode_b64_field(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_string()) {
    throw_error(ErrorCode::invalid_argument, std::string(key) + ": base64 image required");
  }
  return base64_decode(doc[key].get<std::string>());
}

void apply_options(const json& opts, pipeline::JobSpec& spec) {
  if (opts.contains("stage1")) spec.stage1 = pipeline::stage1_from_json(opts["stage1"]);
  if (opts.contains("stage2")) spec.stage2 = pipeline::stage2_from_json(opts["stage2"]);
  if (opts.contains("branches")) {
    const auto& b = opts["branches"];
    if (b.contains("stage1")) spec.stage1_branches = pipeline::branches_from_json(b["stage1"]);
    if (b.contains("stage2")) spec.stage2_branches = pipeline::branches_from_json(b["stage2"]);
  }
}

// Per-connection queue feeding one event-stream response.
struct EventQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<pipeline::EngineEvent> events;
};

std::string sse_frame(const std::string& event, const json& data) {
  return "event: " + event + "\ndata: " + data.dump() + "\n\n";
}

}  // namespace

struct Server::Impl {
  ServiceConfig config;
  std::vector<std::string> warnings;
  std::vector<std::string> recovered;
  FsBlobStore blobs;
  FsJobRepository jobs;
  gateway::Gateway gw;
  pipeline::Engine engine;
  httplib::Server http;
  std::thread listener;
  int port = -1;

  std::mutex workers_mu;
  std::vector<std::thread> workers;
  std::atomic<bool> stopping{false};
  std::mutex wait_mu;
  std::condition_variable wait_cv;
  bool stopped = false;

  static gateway::GatewayOptions gateway_options(const ServiceConfig& c) {
    gateway::GatewayOptions o;
    o.vram = c.vram;
    o.retries = c.retries;
    o.backoff = std::chrono::milliseconds(c.backoff_ms);
    o.timeout = std::chrono::milliseconds(c.request_timeout_ms);
    return o;
  }

  static pipeline::EngineOptions engine_options(const ServiceConfig& c) {
    pipeline::EngineOptions o;
    o.lora_name = c.lora_name;
    return o;
  }

  explicit Impl(ServiceConfig cfg)
      : config(std::move(cfg)),
        blobs(config.store / "blobs"),
        jobs(config.store / "jobs"),
        gw(gateway_options(config)),
        engine(blobs, jobs, gw, engine_options(config)) {
    warnings = startup_warnings(config);
    for (auto& b : config.backends) gw.add_backend(b);
    for (const auto& job : jobs.list()) {
      if (pipeline::is_running(job.state)) {
        engine.mark_interrupted(job.id);
        recovered.push_back(job.id);
      }
    }
    for (const auto& bad : jobs.corrupt()) warnings.push_back("job record '" + bad + "' is unreadable and was skipped");
    routes();
  }

  template <class Fn>
  static void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const json::exception& e) {
      send_error(res, Error(ErrorCode::invalid_argument, e.what()));
    } catch (const std::exception& e) {
      send_json(res, {{"code", "internal"}, {"message", e.what()}, {"details", json::array()}}, 500);
    }
  }

  void spawn(std::function<void()> task) {
    std::lock_guard lock(workers_mu);
    if (stopping) throw_error(ErrorCode::precondition_failed, "service is shutting down");
    workers.emplace_back([task = std::move(task)] {
      try {
        task();
      } catch (...) {
        // The engine records failures on the job itself.
      }
    });
  }

  void routes() {
    http.Get("/health", [](const httplib::Request&, httplib::Response& res) { send_json(res, {{"status", "ok"}}); });

    http.Post("/jobs", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        Bytes image;
        json facts_doc;
        json opts = json::object();
        if (req.is_multipart_form_data()) {
          if (!req.has_file("image")) throw_error(ErrorCode::invalid_argument, "multipart field 'image' is required");
          const auto part = req.get_file_value("image");
          image.assign(part.content.begin(), part.content.end());
          if (!req.has_file("facts")) throw_error(ErrorCode::invalid_argument, "multipart field 'facts' is required");
          try {
            facts_doc = json::parse(req.get_file_value("facts").content);
            if (req.has_file("options")) opts = json::parse(req.get_file_value("options").content);
          } catch (const json::parse_error& e) {
            throw_error(ErrorCode::parse_error, std::string("multipart JSON field: ") + e.what());
          }
        } else {
          auto body = parse_body(req, false);
          image = decode_b64_field(body, "image");
          facts_doc = body.value("facts", json());
          opts = body;
        }
        auto spec = config.job_defaults;
        apply_options(opts, spec);
        auto job = engine.create_job(image, prompt::facts_from_json(facts_doc), spec);
        send_json(res, pipeline::to_json(job), 201);
      });
    });

    http.Get("/jobs", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        json out = json::array();
        for (const auto& job : engine.list()) out.push_back(pipeline::to_json(job));
        send_json(res, out);
      });
    });

    http.Get(R"(/jobs/([A-Za-z0-9_-]+))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, pipeline::to_json(engine.get(req.matches[1]))); });
    });

    http.Post(R"(/jobs/([A-Za-z0-9_-]+)/preprocess)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, pipeline::to_json(engine.preprocess(req.matches[1]))); });
    });

    http.Post(R"(/jobs/([A-Za-z0-9_-]+)/stage1)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        const auto body = parse_body(req);
        auto job = engine.start_stage1(id);
        if (body.value("wait", false)) {
          send_json(res, pipeline::to_json(engine.execute_stage1(id)));
          return;
        }
        spawn([this, id] { engine.execute_stage1(id); });
        send_json(res, pipeline::to_json(job), 202);
      });
    });

    http.Post(R"(/jobs/([A-Za-z0-9_-]+)/stage2)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        const auto body = parse_body(req);
        std::optional<std::string> control;
        if (body.contains("control_candidate") && !body["control_candidate"].is_null()) {
          control = body["control_candidate"].get<std::string>();
        }
        auto job = engine.start_stage2(id, control);
        if (body.value("wait", false)) {
          send_json(res, pipeline::to_json(engine.execute_stage2(id)));
          return;
        }
        spawn([this, id] { engine.execute_stage2(id); });
        send_json(res, pipeline::to_json(job), 202);
      });
    });

    http.Post(R"(/jobs/([A-Za-z0-9_-]+)/select)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = parse_body(req, false);
        const auto stage = pipeline::stage_from_string(body.at("stage").get<std::string>());
        const auto branch = pipeline::branch_from_string(body.at("branch").get<std::string>());
        auto job = engine.select_candidate(req.matches[1], stage, branch, body.at("candidate").get<std::string>());
        send_json(res, pipeline::to_json(job));
      });
    });

    http.Post(R"(/jobs/([A-Za-z0-9_-]+)/retry)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, pipeline::to_json(engine.retry(req.matches[1]))); });
    });

    http.Post(R"(/jobs/([A-Za-z0-9_-]+)/rerun)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] { send_json(res, pipeline::to_json(engine.rerun(req.matches[1])), 201); });
    });

    http.Get(R"(/jobs/([A-Za-z0-9_-]+)/events)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        const auto snapshot = engine.get(id);
        auto queue = std::make_shared<EventQueue>();
        const auto token = engine.subscribe([queue, id](const pipeline::EngineEvent& e) {
          if (e.job_id != id) return;
          {
            std::lock_guard lock(queue->mu);
            queue->events.push_back(e);
          }
          queue->cv.notify_all();
        });
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream",
            [this, queue, snapshot, sent_snapshot = false](std::size_t, httplib::DataSink& sink) mutable {
              if (!sent_snapshot) {
                sent_snapshot = true;
                const auto frame = sse_frame("snapshot", pipeline::to_json(snapshot));
                if (!sink.write(frame.data(), frame.size())) return false;
                if (snapshot.state == pipeline::JobState::completed) {
                  sink.done();
                }
                return true;
              }
              std::unique_lock lock(queue->mu);
              queue->cv.wait_for(lock, std::chrono::milliseconds(500),
                                 [&] { return !queue->events.empty() || stopping.load(); });
              if (stopping) {
                sink.done();
                return true;
              }
              if (queue->events.empty()) {
                static constexpr char kPing[] = ": ping\n\n";
                return sink.write(kPing, sizeof kPing - 1);
              }
              auto event = queue->events.front();
              queue->events.pop_front();
              lock.unlock();
              const auto frame = sse_frame(event.kind, pipeline::to_json(event));
              if (!sink.write(frame.data(), frame.size())) return false;
              if (event.state == pipeline::JobState::completed) sink.done();
              return true;
            },
            [this, token](bool) { engine.unsubscribe(token); });
      });
    });

    http.Get(R"(/candidates/([0-9a-f]{64}))", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto bytes = blobs.get(req.matches[1]);
        if (!bytes) throw_error(ErrorCode::not_found, "no blob " + std::string(req.matches[1]));
        const bool png = bytes->size() >= 8 && (*bytes)[0] == 0x89 && (*bytes)[1] == 'P';
        res.set_content(std::string(bytes->begin(), bytes->end()), png ? "image/png" : "image/jpeg");
      });
    });

    http.Get("/backends", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] {
        json out = json::array();
        for (const auto& b : gw.backends()) out.push_back(gateway::to_json(b));
        send_json(res, out);
      });
    });

    http.Get(R"(/backends/([^/]+)/telemetry)", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const std::string id = req.matches[1];
        const auto status = gw.backend(id);
        json samples = json::array();
        for (const auto& s : gw.telemetry(id)) samples.push_back(gateway::to_json(s));
        send_json(res, {{"backend", id},
                        {"health", gateway::to_string(status.descriptor.health)},
                        {"gaps", status.telemetry_gaps},
                        {"samples", samples}});
      });
    });

    http.Post("/fixtures", [](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = parse_body(req, false);
        const auto gt = imaging::load_image(decode_b64_field(body, "ground_truth"));
        degrade::DegradationSpec spec;
        if (body.contains("spec")) {
          spec = degrade::spec_from_json(body["spec"]);
        } else {
          spec = degrade::second_order_spec(body.value("seed", std::uint64_t{0}));
        }
        auto fixture = degrade::synthesize_fixture(gt, spec);
        const auto png = imaging::save_png(fixture.degraded);
        send_json(res, {{"degraded", base64_encode(png)},
                        {"degraded_hash", sha256_hex(png)},
                        {"manifest", degrade::to_json(fixture.manifest)}});
      });
    });

    http.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = parse_body(req, false);
        auto image_of = [&](const json& v) {
          if (v.contains("hash")) {
            auto bytes = blobs.get(v["hash"].get<std::string>());
            if (!bytes) throw_error(ErrorCode::not_found, "no blob " + v["hash"].get<std::string>());
            return imaging::load_image(*bytes);
          }
          return imaging::load_image(decode_b64_field(v, "image"));
        };
        std::optional<imaging::ImageBuffer> gt;
        if (body.contains("ground_truth") && !body["ground_truth"].is_null()) {
          const auto& g = body["ground_truth"];
          gt = g.is_string() ? imaging::load_image(base64_decode(g.get<std::string>())) : image_of(g);
        }
        std::vector<metrics::Candidate> candidates;
        if (!body.contains("candidates") || !body["candidates"].is_array()) {
          throw_error(ErrorCode::invalid_argument, "candidates: array required");
        }
        for (const auto& c : body["candidates"]) {
          auto id = c.contains("id") ? c["id"].get<std::string>() : c.value("hash", std::string());
          candidates.push_back({std::move(id), image_of(c)});
        }
        send_json(res, metrics::to_json(metrics::compare_report(gt ? &*gt : nullptr, candidates)));
      });
    });

    http.Post("/prompt/preview", [](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        auto body = parse_body(req, false);
        const auto& facts_doc = body.contains("facts") ? body["facts"] : body;
        prompt::SceneFacts facts;
        try {
          facts = prompt::facts_from_json(facts_doc);
        } catch (const Error& e) {
          auto out = error_json(e);
          out["violations"] = json::array();
          for (const auto& d : e.details()) out["violations"].push_back({{"field", d}, {"rule", "schema"}, {"message", d}});
          send_json(res, out, 422);
          return;
        }
        const auto report = prompt::validate_facts(facts);
        if (!report.ok()) {
          send_json(res,
                    {{"code", "validation-error"},
                     {"message", "scene facts violate captioning rules"},
                     {"details", report.lines()},
                     {"violations", prompt::to_json(report)["violations"]}},
                    422);
          return;
        }
        send_json(res, {{"prompt", prompt::build_prompt(facts)},
                        {"caption", prompt::build_caption(facts)},
                        {"violations", json::array()}});
      });
    });

    http.Post("/admin/gc", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, {{"removed", pipeline::collect_garbage(blobs, jobs)}}); });
    });
  }
};

Server::Server(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Server::~Server() { stop(); }

void Server::start() {
  auto& d = *impl_;
  if (d.listener.joinable()) return;
  if (d.config.port == 0) {
    d.port = d.http.bind_to_any_port(d.config.host);
  } else {
    d.port = d.http.bind_to_port(d.config.host, d.config.port) ? d.config.port : -1;
  }
  if (d.port < 0) {
    throw_error(ErrorCode::io_error, "cannot bind " + d.config.host + ":" + std::to_string(d.config.port) +
                                         " (port busy or not permitted)");
  }
  if (d.config.telemetry_period_ms > 0 && !d.config.backends.empty()) {
    d.gw.start_polling(std::chrono::milliseconds(d.config.telemetry_period_ms));
  }
  d.listener = std::thread([&d] { d.http.listen_after_bind(); });
  d.http.wait_until_ready();
}

void Server::wait() {
  std::unique_lock lock(impl_->wait_mu);
  impl_->wait_cv.wait(lock, [this] { return impl_->stopped; });
}

void Server::stop() {
  auto& d = *impl_;
  {
    std::lock_guard lock(d.workers_mu);
    d.stopping = true;
  }
  if (d.listener.joinable()) {
    d.http.stop();
    d.listener.join();
  }
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(d.workers_mu);
    workers.swap(d.workers);
  }
  for (auto& w : workers)
    if (w.joinable()) w.join();
  d.gw.stop_polling();
  {
    std::lock_guard lock(d.wait_mu);
    d.stopped = true;
  }
  d.wait_cv.notify_all();
}

int Server::port() const noexcept { return impl_->port; }
const std::vector<std::string>& Server::warnings() const noexcept { return impl_->warnings; }
const std::vector<std::string>& Server::recovered() const noexcept { return impl_->recovered; }
pipeline::Engine& Server::engine() { return impl_->engine; }
gateway::Gateway& Server::gateway() { return impl_->gw; }
pipeline::BlobStore& Server::blobs() { return impl_->blobs; }

}  // namespace upscaler::service
