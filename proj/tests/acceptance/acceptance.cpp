// Acceptance harness: one PASS/FAIL line per headline criterion, exit status 1
// if any fails. Everything runs against the in-process or loopback mock backend.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "lanczos_oracle.hpp"
#include "random_facts.hpp"
#include "test_support.hpp"
#include "upscaler/dataset/emit.hpp"
#include "upscaler/dataset/manifest.hpp"
#include "upscaler/dataset/training.hpp"
#include "upscaler/degrade/fixture.hpp"
#include "upscaler/error.hpp"
#include "upscaler/gateway/admission.hpp"
#include "upscaler/gateway/gateway.hpp"
#include "upscaler/gateway/mock_backend.hpp"
#include "upscaler/imaging/codec.hpp"
#include "upscaler/imaging/lanczos.hpp"
#include "upscaler/metrics/metrics.hpp"
#include "upscaler/pipeline/engine.hpp"

using namespace upscaler;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& fn) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("unexpected exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %s: %s (%.1f ms)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), ms_since(t0));
  std::fflush(stdout);
}

template <class F>
bool throws_code(ErrorCode code, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code() == code;
  }
  return false;
}

// ---------------------------------------------------------------------------

Outcome noise_steps() {
  const auto t0 = Clock::now();
  const int worked = pipeline::effective_noise_steps(0.8, 50);
  bool full_ok = true;
  for (int steps = 1; steps <= 500; ++steps) full_ok = full_ok && pipeline::effective_noise_steps(1.0, steps) == steps;
  const double ms = ms_since(t0);
  std::ostringstream d;
  d << "(0.8, 50) -> " << worked << ", strength 1.0 -> steps for 1..500: " << (full_ok ? "yes" : "no") << ", " << ms
    << " ms";
  return {worked == 40 && full_ok && ms < 100.0, d.str()};
}

Outcome lanczos_suite() {
  using imaging::ImageBuffer;
  const auto t0 = Clock::now();
  bool kernel_ok = imaging::lanczos_weight(0.0, 3) == 1.0;
  for (int a = 1; a <= 4; ++a)
    for (int n = 1; n <= a + 2; ++n)
      kernel_ok = kernel_ok && imaging::lanczos_weight(n, a) == 0.0 && imaging::lanczos_weight(-n, a) == 0.0;

  Rng rng(20240601);
  double worst_constant = 0, worst_separable = 0, worst_identity = 0, worst_order = 0;
  const int cases = 1000;
  for (int k = 0; k < cases; ++k) {
    const int w = static_cast<int>(rng.uniform_int(1, 20)), h = static_cast<int>(rng.uniform_int(1, 20));
    const int tw = static_cast<int>(rng.uniform_int(1, 28)), th = static_cast<int>(rng.uniform_int(1, 28));
    const imaging::ResampleSpec spec{imaging::Kernel::lanczos, 3, tw, th};

    const float level = static_cast<float>(rng.uniform());
    const auto flat = imaging::resize(ImageBuffer(w, h, level), spec);
    for (float v : flat.pixels()) worst_constant = std::max(worst_constant, std::fabs(static_cast<double>(v) - level));

    const auto img = test::random_image(w, h, rng());
    const auto rows = imaging::resize(img, spec, imaging::PassOrder::rows_first);
    const auto cols = imaging::resize(img, spec, imaging::PassOrder::columns_first);
    const auto ref = test::oracle_resize(img, tw, th, 3);
    for (std::size_t i = 0; i < rows.pixels().size(); ++i) {
      worst_separable = std::max(worst_separable, std::fabs(static_cast<double>(rows.pixels()[i]) - ref.pixels()[i]));
      worst_order = std::max(worst_order, std::fabs(static_cast<double>(rows.pixels()[i]) - cols.pixels()[i]));
    }

    const auto same = imaging::resize(img, {imaging::Kernel::lanczos, 3, w, h});
    for (std::size_t i = 0; i < img.pixels().size(); ++i)
      worst_identity = std::max(worst_identity, std::fabs(static_cast<double>(same.pixels()[i]) - img.pixels()[i]));
  }
  const double ms = ms_since(t0);
  std::ostringstream d;
  d << "kernel exact: " << (kernel_ok ? "yes" : "no") << ", constant " << worst_constant << ", separable vs 2D oracle "
    << worst_separable << ", pass order " << worst_order << ", identity " << worst_identity << ", " << cases
    << " cases in " << ms << " ms";
  const bool ok = kernel_ok && worst_constant <= 1e-6 && worst_separable <= 1e-6 && worst_order <= 1e-6 &&
                  worst_identity <= 1e-6 && ms < 5000.0;
  return {ok, d.str()};
}

Outcome dataset_arithmetic() {
  std::vector<std::string> images;
  for (int i = 0; i < 460; ++i) images.push_back("img" + std::to_string(i) + ".jpg");
  dataset::AugmentConfig aug;  // repeats 5
  const auto rows = dataset::expand_manifest(images, aug, 42);
  const auto plan = dataset::training_plan(460, aug, 4, 2, 1, 10);
  const std::int64_t samples = 460 * 5;
  const std::int64_t per_step = 4 * 2 * 1;
  const std::int64_t oracle = (samples + per_step - 1) / per_step * 10;
  std::ostringstream d;
  d << "manifest " << rows.size() << " (expect 2300), total steps " << plan.total_steps << " (oracle " << oracle << ")";
  return {rows.size() == 2300 && plan.total_steps == oracle && oracle == 2880, d.str()};
}

Outcome lora_arithmetic() {
  const double s = dataset::effective_lora_strength(8, 16);
  const bool rejected = throws_code(ErrorCode::config_error, [] { dataset::effective_lora_strength(16, 8); });
  std::ostringstream d;
  d << "(8,16) -> " << s << ", (16,8) config-error: " << (rejected ? "yes" : "no");
  return {s == 0.5 && rejected, d.str()};
}

Outcome golden_files() {
  dataset::DatasetTomlConfig cfg;
  cfg.augment.num_repeats = 1;
  const auto toml1 = dataset::emit_dataset_toml(cfg), toml2 = dataset::emit_dataset_toml(cfg);
  const auto args = dataset::emit_train_command(dataset::TrainRunConfig{});
  const auto cmd1 = dataset::render_command(args);
  const auto cmd2 = dataset::render_command(dataset::emit_train_command(dataset::TrainRunConfig{}));
  const bool toml_ok = toml1 == test::slurp(test::golden_dir() / "reference_dataset.toml");
  const bool cmd_ok = cmd1 == test::slurp(test::golden_dir() / "reference_train_command.txt");
  auto pair = [&](const std::string& flag, const std::string& value) {
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == flag && args[i + 1] == value) return true;
    return false;
  };
  const bool flags_ok = pair("--discrete_flow_shift", "3.1582") && pair("--network_dim", "8") &&
                        pair("--network_alpha", "8") && pair("--learning_rate", "1e-4");
  const bool stable = toml1 == toml2 && cmd1 == cmd2;
  std::ostringstream d;
  d << "dataset.toml golden " << (toml_ok ? "match" : "MISMATCH") << ", launch args golden "
    << (cmd_ok ? "match" : "MISMATCH") << ", key flags " << (flags_ok ? "present" : "MISSING") << ", byte-stable "
    << (stable ? "yes" : "no");
  return {toml_ok && cmd_ok && flags_ok && stable, d.str()};
}

Outcome vram_admission() {
  using namespace gateway;
  const VramModel model;
  auto descriptor = [](double gb) {
    BackendDescriptor b;
    b.id = "gpu";
    b.endpoint = "http://127.0.0.1:1";
    b.declared_vram_gb = gb;
    b.capabilities = {Capability::img2img, Capability::controlnet, Capability::lora};
    return b;
  };
  auto admitted = [&](RequestKind k, double gb) {
    return admission_check(k, false, descriptor(gb), 0, model).verdict == Verdict::admit;
  };
  bool table_ok = true;
  std::ostringstream d;
  for (double gb : {16.0, 24.0, 30.0, 48.0}) {
    const bool i2i = admitted(RequestKind::img2img, gb), cn = admitted(RequestKind::controlnet, gb);
    table_ok = table_ok && i2i == (gb >= 24.0) && cn == (gb >= 30.0);
    d << gb << "GB img2img=" << (i2i ? "admit" : "reject") << " controlnet=" << (cn ? "admit" : "reject") << "; ";
  }
  const bool headline = !admitted(RequestKind::controlnet, 24) && admitted(RequestKind::controlnet, 48) &&
                        admitted(RequestKind::img2img, 24);
  return {table_ok && headline, d.str()};
}

// ---------------------------------------------------------------------------

prompt::SceneFacts fixture_facts() {
  return prompt::facts_from_json(nlohmann::json::parse(test::slurp(test::data_dir() / "facts_sample.json")));
}

pipeline::EngineOptions seeded_options() {
  pipeline::EngineOptions o;
  auto n = std::make_shared<int>(0);
  o.id_source = [n] { return "job-" + std::to_string((*n)++); };
  o.seed_source = [] { return std::uint64_t{17}; };
  o.clock = [] { return std::string("2026-01-01T00:00:00Z"); };
  return o;
}

struct E2eRun {
  std::vector<pipeline::StateLogEntry> log;
  std::vector<std::string> candidates;
  std::string selected;
};

E2eRun run_two_stage(const Bytes& input, const std::string& endpoint) {
  gateway::GatewayOptions gopts;
  gopts.backoff = std::chrono::milliseconds(1);
  gateway::Gateway gw(gopts);
  gateway::BackendDescriptor b;
  b.id = "mock-0";
  b.endpoint = endpoint;
  b.declared_vram_gb = 48;
  b.capabilities = {gateway::Capability::img2img, gateway::Capability::controlnet, gateway::Capability::lora};
  b.max_in_flight = 2;
  gw.add_backend(b);
  pipeline::MemoryBlobStore blobs;
  pipeline::MemoryJobRepository jobs;
  pipeline::Engine engine(blobs, jobs, gw, seeded_options());
  pipeline::JobSpec spec;
  spec.stage1.seed_mode = spec.stage2.seed_mode = pipeline::SeedMode::fixed;
  spec.stage1_branches = spec.stage2_branches = {pipeline::Branch::with_lora, pipeline::Branch::without_lora};
  const auto id = engine.create_job(input, fixture_facts(), spec).id;
  const auto job = pipeline::run_to_completion(engine, blobs, id);
  E2eRun out;
  out.log = job.log;
  for (const auto* run : {&job.stage1_run, &job.stage2_run})
    for (const auto& [branch, r] : (*run)->branches)
      for (const auto& c : r.candidates) out.candidates.push_back(c.hash);
  if (job.selection) out.selected = job.selection->candidate;
  return out;
}

Outcome end_to_end_determinism() {
  const auto t0 = Clock::now();
  const auto gt = degrade::synthetic_ground_truth(1024, 7);
  const auto fixture = degrade::synthesize_fixture(gt, degrade::second_order_spec(7));
  const auto input = imaging::save_png(fixture.degraded);
  gateway::MockBackendServer server;
  server.start();
  const auto a = run_two_stage(input, server.endpoint());
  const auto b = run_two_stage(input, server.endpoint());
  server.stop();
  const double ms = ms_since(t0);
  const bool completed = !a.log.empty() && a.log.back().to == pipeline::JobState::completed;
  std::ostringstream d;
  d << "input " << fixture.degraded.width() << "x" << fixture.degraded.height() << ", " << a.candidates.size()
    << " candidates, logs " << (a.log == b.log ? "identical" : "DIFFER") << ", hashes "
    << (a.candidates == b.candidates ? "identical" : "DIFFER") << ", " << ms << " ms";
  const bool ok = fixture.degraded.width() == 64 && fixture.degraded.height() == 64 && completed && a.log == b.log &&
                  a.candidates == b.candidates && a.candidates.size() == 12 && a.selected == b.selected &&
                  ms < 30000.0;
  return {ok, d.str()};
}

Outcome reconstruction_sanity() {
  std::printf("  fixture | pipeline PSNR  SSIM    | lanczos PSNR  SSIM\n");
  bool valid = true;
  for (std::uint64_t i = 0; i < 10; ++i) {
    const auto gt = degrade::synthetic_ground_truth(1024, 100 + i);
    const auto fixture = degrade::synthesize_fixture(gt, degrade::second_order_spec(100 + i));
    pipeline::MemoryBlobStore blobs;
    pipeline::MemoryJobRepository jobs;
    gateway::MockClient client;
    pipeline::Engine engine(blobs, jobs, client, seeded_options());
    pipeline::JobSpec spec;
    spec.stage1.seed_mode = spec.stage2.seed_mode = pipeline::SeedMode::fixed;
    const auto id = engine.create_job(imaging::save_png(fixture.degraded), fixture_facts(), spec).id;
    const auto job = pipeline::run_to_completion(engine, blobs, id);
    if (job.state != pipeline::JobState::completed) return {false, "fixture " + std::to_string(i) + " did not complete"};
    const auto selected = imaging::load_image(*blobs.get(job.selection->candidate));
    const auto baseline = imaging::resize(fixture.degraded, {imaging::Kernel::lanczos, 3, 1024, 1024});
    const double p1 = metrics::psnr(gt, selected), s1 = metrics::ssim(gt, selected);
    const double p2 = metrics::psnr(gt, baseline), s2 = metrics::ssim(gt, baseline);
    std::printf("  %7llu | %12.3f  %7.4f | %12.3f  %7.4f\n", static_cast<unsigned long long>(i), p1, s1, p2, s2);
    for (double p : {p1, p2}) valid = valid && std::isfinite(p);
    for (double s : {s1, s2}) valid = valid && s >= -1.0 && s <= 1.0;
  }
  const auto gt = degrade::synthetic_ground_truth(256, 1);
  const bool identity = metrics::psnr(gt, gt) == 99.0 && std::fabs(metrics::ssim(gt, gt) - 1.0) < 1e-12;
  std::ostringstream d;
  d << "10 fixtures scored, PSNR finite and SSIM in [-1,1]: " << (valid ? "yes" : "no")
    << ", identical -> 99 dB / 1.0: " << (identity ? "yes" : "no");
  return {valid && identity, d.str()};
}

// ---------------------------------------------------------------------------

// The declared job graph, written out independently of next_state.
const std::set<std::pair<pipeline::JobState, pipeline::JobState>>& declared_edges() {
  using S = pipeline::JobState;
  static const std::set<std::pair<S, S>> e{
      {S::created, S::preprocessed},         {S::preprocessed, S::stage1_running}, {S::stage1_running, S::stage1_review},
      {S::stage1_review, S::stage2_running}, {S::stage2_running, S::stage2_review}, {S::stage2_review, S::completed},
      {S::created, S::failed},               {S::stage1_running, S::failed},       {S::stage2_running, S::failed},
      {S::failed, S::created},               {S::failed, S::preprocessed},         {S::failed, S::stage1_review},
  };
  return e;
}

// Decorator that checks every controlnet request at the moment it is sent:
// its image must be the control of a job in stage2_running and one of that
// job's stage-1 outputs.
class AuditingClient final : public gateway::InferenceClient {
 public:
  AuditingClient(gateway::InferenceClient& inner, const pipeline::JobRepository& jobs) : inner_(inner), jobs_(jobs) {}

  gateway::InferenceResult infer(const gateway::InferenceRequest& request) override {
    if (request.kind == gateway::RequestKind::controlnet) {
      ++controlnet_requests;
      const auto hash = sha256_hex(request.image);
      bool ok = false;
      for (const auto& job : jobs_.list()) {
        ok = ok || (job.state == pipeline::JobState::stage2_running && job.stage2_run && job.stage2_run->control == hash &&
                    job.stage1_run && job.stage1_run->contains(hash));
      }
      if (!ok) ++foreign_controls;
    }
    return inner_.infer(request);
  }

  std::size_t controlnet_requests = 0;
  std::size_t foreign_controls = 0;

 private:
  gateway::InferenceClient& inner_;
  const pipeline::JobRepository& jobs_;
};

Outcome state_machine_safety() {
  using pipeline::JobEvent;
  using pipeline::JobState;
  Rng rng(99);
  const int sequences = 10000;

  // Pure transition function: random event streams never leave the graph.
  std::size_t pure_illegal = 0, pure_applied = 0;
  for (int s = 0; s < sequences; ++s) {
    JobState state = JobState::created, failed_from = JobState::created;
    for (int k = 0; k < 20; ++k) {
      const auto e = pipeline::kAllEvents[rng.uniform_int(0, std::size(pipeline::kAllEvents) - 1)];
      const auto next = pipeline::next_state(state, e, failed_from);
      if (!next) continue;
      ++pure_applied;
      if (!declared_edges().count({state, *next})) ++pure_illegal;
      if (*next == JobState::failed) failed_from = state;
      state = *next;
    }
  }

  // Engine: random operations, including hostile control images, against tiny jobs.
  std::size_t engine_illegal = 0, broken_chain = 0, hostile_attempts = 0, hostile_accepted = 0;
  std::size_t controlnet = 0, foreign = 0, completed = 0;
  const auto input = imaging::save_png(test::random_image(6, 5, 3));
  const auto facts = fixture_facts();
  for (int s = 0; s < sequences; ++s) {
    pipeline::MemoryBlobStore blobs;
    pipeline::MemoryJobRepository jobs;
    gateway::MockClient mock;
    AuditingClient client(mock, jobs);
    pipeline::Engine engine(blobs, jobs, client, seeded_options());
    pipeline::JobSpec spec;
    spec.stage1.target_side = 8;
    spec.stage1.num_images = static_cast<int>(rng.uniform_int(1, 2));
    spec.stage2.num_images = static_cast<int>(rng.uniform_int(1, 2));
    spec.stage1.seed_mode = spec.stage2.seed_mode = pipeline::SeedMode::fixed;
    spec.stage1_branches = rng.bernoulli(0.5) ? pipeline::BranchSet{pipeline::Branch::without_lora}
                                              : pipeline::BranchSet{pipeline::Branch::with_lora, pipeline::Branch::without_lora};
    const auto id = engine.create_job(input, facts, spec).id;
    for (int k = 0; k < 14; ++k) {
      const auto job = engine.get(id);
      try {
        switch (rng.uniform_int(0, 10)) {
          case 0: engine.preprocess(id); break;
          case 1: engine.run_stage1(id); break;
          case 2: engine.start_stage1(id); break;
          case 3:
            if (job.stage1_run) {
              const auto pick = pipeline::best_by_sharpness(*job.stage1_run, pipeline::Stage::stage1, blobs);
              engine.select_candidate(id, pick.stage, pick.branch, pick.candidate);
            }
            break;
          case 4: {
            // Hostile control images: source, preprocessed, unknown, or a stage-2 output.
            std::vector<std::string> hostile{job.source_ref, job.preprocessed_ref, std::string(64, 'f')};
            if (job.stage2_run)
              for (const auto& [b, r] : job.stage2_run->branches)
                for (const auto& c : r.candidates) hostile.push_back(c.hash);
            const auto pick = hostile[static_cast<std::size_t>(rng.uniform_int(0, hostile.size() - 1))];
            ++hostile_attempts;
            if (!pick.empty() && !(job.stage1_run && job.stage1_run->contains(pick))) {
              try {
                engine.start_stage2(id, pick);
                ++hostile_accepted;
              } catch (const Error&) {
              }
            }
            break;
          }
          case 5: engine.run_stage2(id); break;
          case 6:
            if (job.stage2_run && job.state == JobState::stage2_review) {
              const auto pick = pipeline::best_by_sharpness(*job.stage2_run, pipeline::Stage::stage2, blobs);
              engine.select_candidate(id, pick.stage, pick.branch, pick.candidate);
            }
            break;
          case 7: engine.retry(id); break;
          case 8: engine.mark_interrupted(id); break;
          case 9:
            if (rng.bernoulli(0.5)) mock.fail_lora_branch(1);
            else mock.fail_plain_branch(1);
            break;
          default: engine.execute_stage2(id); break;
        }
      } catch (const Error&) {
        // Rejected operations are expected; the audit below checks what did happen.
      }
    }
    const auto job = engine.get(id);
    if (job.state == JobState::completed) ++completed;
    for (std::size_t i = 0; i < job.log.size(); ++i) {
      if (!declared_edges().count({job.log[i].from, job.log[i].to})) ++engine_illegal;
      if (i > 0 && job.log[i].from != job.log[i - 1].to) ++broken_chain;
    }
    if (!job.log.empty() && job.log.front().from != JobState::created) ++broken_chain;
    controlnet += client.controlnet_requests;
    foreign += client.foreign_controls;
  }
  std::ostringstream d;
  d << sequences << " pure sequences (" << pure_applied << " transitions, " << pure_illegal << " illegal); "
    << sequences << " engine sequences (" << completed << " completed, " << engine_illegal << " illegal, "
    << broken_chain << " broken chains, " << controlnet << " controlnet requests, " << foreign
    << " with foreign control, " << hostile_accepted << "/" << hostile_attempts << " hostile controls accepted)";
  const bool ok = pure_illegal == 0 && engine_illegal == 0 && broken_chain == 0 && foreign == 0 &&
                  hostile_accepted == 0 && controlnet > 0 && completed > 0;
  return {ok, d.str()};
}

Outcome prompt_rule_closure() {
  Rng rng(31337);
  const int cases = 1000;
  int valid = 0, audited = 0, problems = 0, invalid_rejected = 0, invalid = 0;
  std::string first_problem;
  for (int i = 0; i < cases; ++i) {
    const auto g = test::random_facts(rng);
    if (!g.expect_valid) {
      ++invalid;
      if (throws_code(ErrorCode::validation_error, [&] { prompt::build_prompt(g.facts); }) &&
          throws_code(ErrorCode::validation_error, [&] { prompt::build_caption(g.facts); }))
        ++invalid_rejected;
      continue;
    }
    ++valid;
    for (const auto& text : {prompt::build_prompt(g.facts), prompt::build_caption(g.facts)}) {
      ++audited;
      const auto p = test::audit_text(g, text);
      problems += static_cast<int>(p.size());
      if (!p.empty() && first_problem.empty()) first_problem = p.front();
    }
  }
  std::ostringstream d;
  d << cases << " instances: " << valid << " valid (" << audited << " texts audited, " << problems << " problems), "
    << invalid_rejected << "/" << invalid << " rule-breaking instances rejected";
  if (!first_problem.empty()) d << "; first: " << first_problem;
  return {problems == 0 && invalid_rejected == invalid && valid > 0, d.str()};
}

}  // namespace

int main() {
  criterion("noise-step arithmetic", noise_steps);
  criterion("lanczos property suite", lanczos_suite);
  criterion("dataset arithmetic", dataset_arithmetic);
  criterion("lora arithmetic", lora_arithmetic);
  criterion("config emission golden files", golden_files);
  criterion("vram admission", vram_admission);
  criterion("end-to-end determinism", end_to_end_determinism);
  criterion("reconstruction sanity vs baseline", reconstruction_sanity);
  criterion("state-machine safety", state_machine_safety);
  criterion("prompt rule closure", prompt_rule_closure);
  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
