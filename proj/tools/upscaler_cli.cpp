// upscaler command-line front end. Every subcommand is a thin composition of
// library calls; errors leave as {"error": {...}} on stderr with exit code 1.

#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "upscaler/dataset/buckets.hpp"
#include "upscaler/dataset/captions.hpp"
#include "upscaler/dataset/emit.hpp"
#include "upscaler/dataset/loss_log.hpp"
#include "upscaler/dataset/manifest.hpp"
#include "upscaler/dataset/training.hpp"
#include "upscaler/degrade/fixture.hpp"
#include "upscaler/error.hpp"
#include "upscaler/gateway/gateway.hpp"
#include "upscaler/gateway/mock_backend.hpp"
#include "upscaler/imaging/codec.hpp"
#include "upscaler/metrics/metrics.hpp"
#include "upscaler/pipeline/engine.hpp"
#include "upscaler/prompt/prompt.hpp"
#include "upscaler/service/config.hpp"
#include "upscaler/service/server.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace upscaler;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_error(ErrorCode::io_error, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw_error(ErrorCode::parse_error, path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  const auto bytes = std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
  imaging::write_file(path, bytes);
}

void print(const json& doc) { std::cout << doc.dump(2) << "\n"; }

gateway::BackendDescriptor mock_descriptor(const std::string& endpoint) {
  gateway::BackendDescriptor d;
  d.id = "mock-0";
  d.endpoint = endpoint;
  d.declared_vram_gb = 48.0;
  d.capabilities = {gateway::Capability::img2img, gateway::Capability::controlnet, gateway::Capability::lora};
  d.max_in_flight = 2;
  return d;
}

// ---- serve

struct ServeArgs {
  std::string config;
  std::optional<int> port;
  std::optional<std::string> store;
  bool mock_backend = false;
};

int run_serve(const ServeArgs& a) {
  auto cfg = a.config.empty() ? service::ServiceConfig{} : service::load_config(a.config);
  service::apply_env(cfg);
  if (a.port) cfg.port = *a.port;
  if (a.store) cfg.store = *a.store;

  // Block the shutdown signals before any thread exists so sigwait owns them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  std::optional<gateway::MockBackendServer> mock;
  if (a.mock_backend) {
    mock.emplace();
    mock->start();
    cfg.backends.push_back(mock_descriptor(mock->endpoint()));
  }

  service::Server server(cfg);
  server.start();
  print({{"listening", server.port()}, {"warnings", server.warnings()}, {"recovered", server.recovered()}});
  std::cout.flush();

  std::thread waiter([&] {
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  });
  server.wait();
  // Stopped for a reason other than a signal: release the waiter.
  if (waiter.joinable()) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
  }
  if (mock) mock->stop();
  return 0;
}

// ---- reconstruct run

struct ReconstructArgs {
  std::string input;
  std::string facts;
  bool lora_branch = false;
  bool no_lora_branch = false;
  std::optional<std::uint64_t> seed;
  std::string output = "reconstructed.png";
  std::string backend;
  std::string config;
};

int run_reconstruct(const ReconstructArgs& a) {
  const auto source = imaging::read_file(a.input);
  const auto facts = prompt::facts_from_json(read_json(a.facts));

  pipeline::JobSpec spec;
  gateway::GatewayOptions gopts;
  std::vector<gateway::BackendDescriptor> backends;
  if (!a.config.empty()) {
    auto cfg = service::load_config(a.config);
    service::apply_env(cfg);
    spec = cfg.job_defaults;
    gopts.vram = cfg.vram;
    gopts.retries = cfg.retries;
    gopts.backoff = std::chrono::milliseconds(cfg.backoff_ms);
    gopts.timeout = std::chrono::milliseconds(cfg.request_timeout_ms);
    backends = cfg.backends;
  }
  if (a.lora_branch) spec.stage1_branches.insert(pipeline::Branch::with_lora);
  if (a.no_lora_branch) {
    spec.stage1_branches.erase(pipeline::Branch::with_lora);
    spec.stage2_branches.erase(pipeline::Branch::with_lora);
  }
  if (a.seed) {
    spec.stage1.seed_mode = spec.stage2.seed_mode = pipeline::SeedMode::fixed;
    spec.stage1.seed = spec.stage2.seed = *a.seed;
  }

  std::optional<gateway::MockBackendServer> mock;
  if (!a.backend.empty()) {
    backends = {mock_descriptor(a.backend)};
    backends.front().id = "backend-0";
  } else if (backends.empty()) {
    mock.emplace();
    mock->start();
    backends.push_back(mock_descriptor(mock->endpoint()));
  }

  gateway::Gateway gw(gopts);
  for (auto& b : backends) gw.add_backend(b);

  pipeline::MemoryBlobStore blobs;
  pipeline::MemoryJobRepository jobs;
  pipeline::Engine engine(blobs, jobs, gw);
  auto job = engine.create_job(source, facts, spec);
  job = pipeline::run_to_completion(engine, blobs, job.id);
  if (mock) mock->stop();

  if (job.state != pipeline::JobState::completed) {
    const auto message = job.error ? job.error->message : std::string("job did not complete");
    throw_error(ErrorCode::precondition_failed, message, {"state: " + std::string(pipeline::to_string(job.state))});
  }
  const auto& pick = *job.selection;
  const auto bytes = blobs.get(pick.candidate);
  imaging::write_file(a.output, *bytes);
  const auto img = imaging::load_image(*bytes);
  print({{"job", job.id},
         {"output", a.output},
         {"width", img.width()},
         {"height", img.height()},
         {"control", job.control_selection ? json(pipeline::to_json(job).at("control_selection")) : json()},
         {"selection", pipeline::to_json(job).at("selection")},
         {"prompt", job.prompt},
         {"warnings", job.warnings}});
  return 0;
}

// ---- fixture make

struct FixtureArgs {
  std::string input;
  int synthetic = 0;
  std::string output;
  std::string ground_truth_output;
  std::string manifest;
  std::string spec;
  std::uint64_t seed = 0;
};

int run_fixture(const FixtureArgs& a) {
  if (a.input.empty() == (a.synthetic == 0)) {
    throw_error(ErrorCode::invalid_argument, "give exactly one of --input or --synthetic");
  }
  const auto gt = a.input.empty() ? degrade::synthetic_ground_truth(a.synthetic, a.seed)
                                  : imaging::load_image_file(a.input);
  auto spec = a.spec.empty() ? degrade::second_order_spec(a.seed) : degrade::spec_from_json(read_json(a.spec));
  if (!a.spec.empty()) spec.seed = a.seed;
  const auto fixture = degrade::synthesize_fixture(gt, spec);

  imaging::write_file(a.output, imaging::save_png(fixture.degraded));
  if (!a.ground_truth_output.empty()) imaging::write_file(a.ground_truth_output, imaging::save_png(gt));
  const auto manifest_path = a.manifest.empty() ? fs::path(a.output).replace_extension(".json") : fs::path(a.manifest);
  auto doc = degrade::to_json(fixture.manifest);
  write_text(manifest_path, doc.dump(2) + "\n");
  print({{"degraded", a.output}, {"manifest", manifest_path.string()}, {"fixture", doc}});
  return 0;
}

// ---- score

int run_score(const std::string& gt_path, const std::vector<std::string>& cands) {
  std::optional<imaging::ImageBuffer> gt;
  if (!gt_path.empty()) gt = imaging::load_image_file(gt_path);
  std::vector<metrics::Candidate> candidates;
  for (const auto& c : cands) candidates.push_back({c, imaging::load_image_file(c)});
  print(metrics::to_json(metrics::compare_report(gt ? &*gt : nullptr, candidates)));
  return 0;
}

// ---- dataset

struct DatasetArgs {
  std::string captions;
  std::string root;
  std::vector<std::string> images;
  std::vector<std::string> sizes;
  int max_reso = 1024;
  int step = 64;
  bool no_bucket = false;
  int repeats = 5;
  bool no_flip = false;
  std::uint64_t seed = 42;
  std::string out_dir = ".";
  std::string train_config;
  std::string image_dir = "/workspace/imgs";
  std::string metadata_file = "/workspace/captions_kohya.json";
  std::int64_t count = 0;
  int batch = 4;
  int gpus = 2;
  int accum = 1;
  int epochs = 10;
  std::string log;
  bool series = false;
};

fs::path caption_root(const DatasetArgs& a) {
  return a.root.empty() ? fs::path(a.captions).parent_path() : fs::path(a.root);
}

dataset::AugmentConfig augment(const DatasetArgs& a) {
  dataset::AugmentConfig aug;
  aug.num_repeats = a.repeats;
  aug.flip_aug = !a.no_flip;
  return aug;
}

dataset::BucketConfig bucket(const DatasetArgs& a) {
  dataset::BucketConfig b;
  b.enabled = !a.no_bucket;
  b.max_reso = a.max_reso;
  b.dim_step = a.step;
  return b;
}

dataset::Dimensions parse_size(const std::string& text) {
  const auto x = text.find('x');
  try {
    if (x == std::string::npos) throw std::invalid_argument(text);
    return {std::stoi(text.substr(0, x)), std::stoi(text.substr(x + 1))};
  } catch (const std::exception&) {
    throw_error(ErrorCode::invalid_argument, "size must look like WxH, got '" + text + "'");
  }
}

int run_dataset_validate(const DatasetArgs& a) {
  const auto report = dataset::validate_captions(read_text(a.captions), caption_root(a));
  auto doc = dataset::to_json(report);
  print(doc);
  if (!report.ok()) {
    std::vector<std::string> details = report.findings;
    for (const auto& e : report.entries)
      for (const auto& f : e.findings) details.push_back(e.key + ": " + f);
    throw_error(ErrorCode::validation_error, "caption dataset has findings", details);
  }
  return 0;
}

int run_dataset_buckets(const DatasetArgs& a) {
  std::vector<dataset::Dimensions> dims;
  for (const auto& s : a.sizes) dims.push_back(parse_size(s));
  for (const auto& p : a.images) {
    const auto img = imaging::load_image_file(p);
    dims.push_back({img.width(), img.height()});
  }
  print(dataset::to_json(dataset::assign_buckets(dims, bucket(a))));
  return 0;
}

int run_dataset_manifest(const DatasetArgs& a) {
  const auto data = dataset::load_caption_dataset(read_text(a.captions), caption_root(a));
  print(dataset::to_json(dataset::expand_manifest(data, augment(a), a.seed)));
  return 0;
}

int run_dataset_emit(const DatasetArgs& a) {
  dataset::DatasetTomlConfig toml;
  toml.bucket = bucket(a);
  toml.augment = augment(a);
  toml.image_dir = a.image_dir;
  toml.metadata_file = a.metadata_file;
  const auto train = a.train_config.empty() ? dataset::TrainRunConfig{}
                                            : dataset::train_config_from_json(read_json(a.train_config));
  dataset::validate(train);
  const auto text = dataset::emit_dataset_toml(toml);
  const auto command = dataset::render_command(dataset::emit_train_command(train));
  fs::create_directories(a.out_dir);
  const auto toml_path = fs::path(a.out_dir) / "dataset.toml";
  const auto cmd_path = fs::path(a.out_dir) / "train_command.txt";
  write_text(toml_path, text);
  write_text(cmd_path, command);
  print({{"dataset_toml", toml_path.string()}, {"train_command", cmd_path.string()}});
  return 0;
}

int run_dataset_plan(const DatasetArgs& a) {
  auto n = a.count;
  if (!a.captions.empty()) {
    n = static_cast<std::int64_t>(dataset::load_caption_dataset(read_text(a.captions), caption_root(a)).entries.size());
  }
  const auto plan = dataset::training_plan(n, augment(a), a.batch, a.gpus, a.accum, a.epochs);
  auto doc = dataset::to_json(plan);
  doc["images"] = n;
  print(doc);
  return 0;
}

int run_dataset_loss(const DatasetArgs& a) {
  print(dataset::to_json(dataset::parse_loss_log(read_text(a.log)), a.series));
  return 0;
}

// ---- prompt build

int run_prompt(const std::string& facts_path, bool caption) {
  const auto facts = prompt::facts_from_json(read_json(facts_path));
  prompt::require_valid(facts);
  json doc{{"prompt", prompt::build_prompt(facts)}};
  if (caption) doc["caption"] = prompt::build_caption(facts);
  print(doc);
  return 0;
}

int fail(const Error& e) {
  json err{{"code", std::string(to_string(e.code()))}, {"message", e.what()}, {"details", e.details()}};
  std::cerr << json{{"error", err}}.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage football frame reconstruction toolkit"};
  app.require_subcommand(1);

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the REST service");
  serve_cmd->add_option("--config", serve.config, "Service config JSON")->check(CLI::ExistingFile);
  serve_cmd->add_option("--port", serve.port, "Listen port (0 picks one)");
  serve_cmd->add_option("--store", serve.store, "Store root directory");
  serve_cmd->add_flag("--mock-backend", serve.mock_backend, "Register an in-process mock backend");

  ReconstructArgs rec;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Reconstruction pipeline");
  rec_cmd->require_subcommand(1);
  auto* run_cmd = rec_cmd->add_subcommand("run", "Run both stages and write the selected output");
  run_cmd->add_option("--input", rec.input, "Source image")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--facts", rec.facts, "Scene facts JSON")->required()->check(CLI::ExistingFile);
  auto* lora_flag = run_cmd->add_flag("--lora-branch", rec.lora_branch, "Also run the LoRA branch in stage 1");
  run_cmd->add_flag("--no-lora-branch", rec.no_lora_branch, "Disable the LoRA branch everywhere")->excludes(lora_flag);
  run_cmd->add_option("--seed", rec.seed, "Fixed seed for both stages");
  run_cmd->add_option("--output", rec.output, "Output PNG");
  run_cmd->add_option("--backend", rec.backend, "Backend endpoint (default: in-process mock)");
  run_cmd->add_option("--config", rec.config, "Service config JSON for backends and job defaults")
      ->check(CLI::ExistingFile);

  FixtureArgs fix;
  auto* fixture_cmd = app.add_subcommand("fixture", "Degradation fixtures");
  fixture_cmd->require_subcommand(1);
  auto* make_cmd = fixture_cmd->add_subcommand("make", "Degrade a ground truth into a fixture");
  auto* in_opt = make_cmd->add_option("--input", fix.input, "Ground-truth image")->check(CLI::ExistingFile);
  make_cmd->add_option("--synthetic", fix.synthetic, "Synthesize a SIDE x SIDE ground truth")->excludes(in_opt);
  make_cmd->add_option("--output", fix.output, "Degraded PNG")->required();
  make_cmd->add_option("--ground-truth-output", fix.ground_truth_output, "Also write the ground truth PNG");
  make_cmd->add_option("--manifest", fix.manifest, "Manifest JSON (default: next to --output)");
  make_cmd->add_option("--spec", fix.spec, "Degradation spec JSON (default: second-order)")->check(CLI::ExistingFile);
  make_cmd->add_option("--seed", fix.seed, "Fixture seed");

  std::string gt;
  std::vector<std::string> cands;
  auto* score_cmd = app.add_subcommand("score", "Score candidates");
  score_cmd->add_option("--gt", gt, "Ground truth (omit for blind ranking)")->check(CLI::ExistingFile);
  score_cmd->add_option("--cand", cands, "Candidate image (repeatable)")->required()->check(CLI::ExistingFile);

  DatasetArgs ds;
  auto* dataset_cmd = app.add_subcommand("dataset", "LoRA dataset tooling");
  dataset_cmd->require_subcommand(1);
  auto captions_opts = [&](CLI::App* c, bool required) {
    auto* o = c->add_option("--captions", ds.captions, "Caption JSON")->check(CLI::ExistingFile);
    if (required) o->required();
    c->add_option("--root", ds.root, "Image root (default: caption file directory)");
  };
  auto augment_opts = [&](CLI::App* c) {
    c->add_option("--repeats", ds.repeats, "num_repeats");
    c->add_flag("--no-flip", ds.no_flip, "Disable flip augmentation");
  };
  auto bucket_opts = [&](CLI::App* c) {
    c->add_option("--max-reso", ds.max_reso, "Bucket area bound side");
    c->add_option("--step", ds.step, "Bucket dimension step");
    c->add_flag("--no-bucket", ds.no_bucket, "Disable bucketing");
  };
  auto* validate_cmd = dataset_cmd->add_subcommand("validate", "Validate a caption JSON");
  captions_opts(validate_cmd, true);
  auto* buckets_cmd = dataset_cmd->add_subcommand("buckets", "Assign aspect buckets");
  buckets_cmd->add_option("--image", ds.images, "Image file (repeatable)")->check(CLI::ExistingFile);
  buckets_cmd->add_option("--size", ds.sizes, "WxH (repeatable)");
  bucket_opts(buckets_cmd);
  auto* manifest_cmd = dataset_cmd->add_subcommand("manifest", "Expand the epoch manifest");
  captions_opts(manifest_cmd, true);
  augment_opts(manifest_cmd);
  manifest_cmd->add_option("--seed", ds.seed, "Shuffle seed");
  auto* emit_cmd = dataset_cmd->add_subcommand("emit", "Write dataset TOML and launch command");
  emit_cmd->add_option("--out-dir", ds.out_dir, "Output directory");
  emit_cmd->add_option("--train-config", ds.train_config, "Training config JSON")->check(CLI::ExistingFile);
  emit_cmd->add_option("--image-dir", ds.image_dir, "image_dir written to the TOML");
  emit_cmd->add_option("--metadata-file", ds.metadata_file, "metadata_file written to the TOML");
  bucket_opts(emit_cmd);
  augment_opts(emit_cmd);
  auto* plan_cmd = dataset_cmd->add_subcommand("plan", "Samples and steps per run");
  auto* count_opt = plan_cmd->add_option("--images", ds.count, "Image count");
  captions_opts(plan_cmd, false);
  plan_cmd->get_option("--captions")->excludes(count_opt);
  augment_opts(plan_cmd);
  plan_cmd->add_option("--batch", ds.batch, "Per-device batch size");
  plan_cmd->add_option("--gpus", ds.gpus, "GPU count");
  plan_cmd->add_option("--accum", ds.accum, "Gradient accumulation steps");
  plan_cmd->add_option("--epochs", ds.epochs, "Epochs");
  auto* loss_cmd = dataset_cmd->add_subcommand("loss", "Summarize a loss log CSV");
  loss_cmd->add_option("--log", ds.log, "CSV export")->required()->check(CLI::ExistingFile);
  loss_cmd->add_flag("--series", ds.series, "Include the full series");

  std::string facts;
  bool caption = false;
  auto* prompt_cmd = app.add_subcommand("prompt", "Prompt tooling");
  prompt_cmd->require_subcommand(1);
  auto* build_cmd = prompt_cmd->add_subcommand("build", "Build the generation prompt from facts");
  build_cmd->add_option("--facts", facts, "Scene facts JSON")->required()->check(CLI::ExistingFile);
  build_cmd->add_flag("--caption", caption, "Also build the dataset caption");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*serve_cmd) return run_serve(serve);
    if (*run_cmd) return run_reconstruct(rec);
    if (*make_cmd) return run_fixture(fix);
    if (*score_cmd) return run_score(gt, cands);
    if (*validate_cmd) return run_dataset_validate(ds);
    if (*buckets_cmd) return run_dataset_buckets(ds);
    if (*manifest_cmd) return run_dataset_manifest(ds);
    if (*emit_cmd) return run_dataset_emit(ds);
    if (*plan_cmd) return run_dataset_plan(ds);
    if (*loss_cmd) return run_dataset_loss(ds);
    if (*build_cmd) return run_prompt(facts, caption);
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail(Error(ErrorCode::io_error, e.what()));
  }
  return 2;
}
