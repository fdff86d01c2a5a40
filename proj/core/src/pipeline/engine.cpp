#include "upscaler/pipeline/engine.hpp"

#include <chrono>
#include <ctime>
#include <future>
#include <random>

#include "upscaler/error.hpp"
#include "upscaler/imaging/codec.hpp"
#include "upscaler/imaging/lanczos.hpp"
#include "upscaler/metrics/metrics.hpp"
#include "upscaler/prompt/prompt.hpp"

namespace upscaler::pipeline {

using nlohmann::json;

json to_json(const EngineEvent& e) {
  json out = {{"seq", e.seq}, {"job_id", e.job_id}, {"kind", e.kind}, {"state", to_string(e.state)}};
  if (e.entry) out["transition"] = to_json(*e.entry);
  return out;
}

namespace {

std::uint64_t random_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::string random_id() {
  static constexpr char kHex[] = "0123456789abcdef";
  auto v = random_seed();
  std::string id = "job-";
  for (int i = 0; i < 16; ++i, v >>= 4) id += kHex[v & 0xF];
  return id;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string band_note(double scale) {
  const bool inside = scale >= kConditioningLow && scale <= kConditioningHigh;
  return "conditioning_scale " + json(scale).dump() + (inside ? " within" : " outside") +
         " recommended band [0.5, 0.65]";
}

std::string branch_summary(const StageRun& run) {
  std::string ok, failed;
  for (const auto& [b, r] : run.branches) {
    auto& dst = r.status == BranchStatus::ok ? ok : failed;
    if (!dst.empty()) dst += ",";
    dst += to_string(b);
  }
  return "ok=[" + ok + "] failed=[" + failed + "] candidates=" + std::to_string(run.candidate_count());
}

}  // namespace

Engine::Engine(BlobStore& blobs, JobRepository& jobs, gateway::InferenceClient& client, EngineOptions options)
    : blobs_(blobs), jobs_(jobs), client_(client), options_(std::move(options)) {
  if (!options_.seed_source) options_.seed_source = random_seed;
  if (!options_.id_source) options_.id_source = random_id;
  if (!options_.clock) options_.clock = utc_now;
}

std::shared_ptr<std::mutex> Engine::lock_for(const std::string& id) {
  std::lock_guard lock(locks_mu_);
  auto& slot = locks_[id];
  if (!slot) slot = std::make_shared<std::mutex>();
  return slot;
}

ReconstructionJob Engine::load(const std::string& id) const {
  auto job = jobs_.load(id);
  if (!job) throw_error(ErrorCode::not_found, "unknown job '" + id + "'");
  return *job;
}

ReconstructionJob Engine::get(const std::string& id) const { return load(id); }

std::vector<ReconstructionJob> Engine::list() const { return jobs_.list(); }

std::uint64_t Engine::subscribe(EngineListener listener) {
  std::lock_guard lock(listeners_mu_);
  listeners_[next_token_] = std::move(listener);
  return next_token_++;
}

void Engine::unsubscribe(std::uint64_t token) {
  std::lock_guard lock(listeners_mu_);
  listeners_.erase(token);
}

void Engine::notify(const ReconstructionJob& job, const std::string& kind, std::optional<StateLogEntry> entry) {
  EngineEvent event{++seq_, job.id, kind, job.state, std::move(entry)};
  std::vector<EngineListener> targets;
  {
    std::lock_guard lock(listeners_mu_);
    for (const auto& [t, l] : listeners_) targets.push_back(l);
  }
  for (const auto& l : targets) l(event);
}

void Engine::commit(ReconstructionJob& job) {
  job.updated_at = options_.clock();
  ++job.revision;
  jobs_.save(job);
}

void Engine::transition(ReconstructionJob& job, JobEvent event, std::string detail) {
  auto next = next_state(job.state, event, job.failed_from);
  if (!next) {
    throw_error(ErrorCode::precondition_failed, "cannot " + std::string(to_string(event)) + " a job in state " +
                                                    std::string(to_string(job.state)));
  }
  StateLogEntry entry{job.state, *next, event, std::move(detail)};
  if (*next == JobState::failed) job.failed_from = job.state;
  job.state = *next;
  job.log.push_back(entry);
  commit(job);
  notify(job, "transition", entry);
}

void Engine::fail(ReconstructionJob& job, std::string code, std::string message, bool retryable) {
  job.error = JobError{std::move(code), message, retryable};
  transition(job, JobEvent::fail, std::move(message));
}

ReconstructionJob Engine::create_job(std::span<const std::uint8_t> image, const prompt::SceneFacts& facts,
                                     const JobSpec& spec) {
  (void)imaging::load_image(image);
  prompt::require_valid(facts);
  auto report = validate_configs(spec.stage1, spec.stage2);
  if (spec.stage1_branches.empty() || spec.stage2_branches.empty()) {
    throw_error(ErrorCode::config_error, "each stage needs at least one branch");
  }
  ReconstructionJob job;
  job.id = options_.id_source();
  job.source_ref = blobs_.put(image);
  job.facts = facts;
  job.prompt = prompt::build_prompt(facts);
  job.stage1 = spec.stage1;
  job.stage2 = spec.stage2;
  job.stage1_branches = spec.stage1_branches;
  job.stage2_branches = spec.stage2_branches;
  job.warnings = std::move(report.warnings);
  job.created_at = options_.clock();
  auto lock = lock_for(job.id);
  std::lock_guard guard(*lock);
  if (jobs_.load(job.id)) throw_error(ErrorCode::precondition_failed, "job id '" + job.id + "' already exists");
  commit(job);
  notify(job, "created", std::nullopt);
  return job;
}

ReconstructionJob Engine::preprocess(const std::string& id) {
  auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  auto job = load(id);
  if (job.state == JobState::preprocessed && !job.preprocessed_ref.empty()) return job;
  if (job.state != JobState::created) {
    throw_error(ErrorCode::precondition_failed, "preprocess requires state created, job is " +
                                                    std::string(to_string(job.state)));
  }
  try {
    auto bytes = blobs_.get(job.source_ref);
    if (!bytes) throw_error(ErrorCode::not_found, "source blob " + job.source_ref + " is missing");
    const auto source = imaging::load_image(*bytes);
    const int side = job.stage1.target_side;
    const bool square = source.width() == side && source.height() == side;
    const auto standardized = square ? source : imaging::standardize_square(source, side);
    job.preprocessed_ref = blobs_.put(imaging::save_png(standardized));
    if (job.stage1.archive_256) job.archive_ref = blobs_.put(imaging::save_png(imaging::standardize_square(source, 256)));
    transition(job, JobEvent::preprocess,
               std::to_string(source.width()) + "x" + std::to_string(source.height()) + " -> " +
                   std::to_string(side) + "x" + std::to_string(side) + (square ? " (pass-through)" : " (lanczos)"));
  } catch (const Error& e) {
    fail(job, std::string(to_string(e.code())), std::string("preprocess failed: ") + e.what(), true);
  }
  return job;
}

gateway::InferenceRequest Engine::build_request(const ReconstructionJob& job, Stage stage, Branch branch, Bytes image,
                                                std::uint64_t seed) const {
  gateway::InferenceRequest r;
  r.prompt = job.prompt;  // both stages share the prompt
  r.image = std::move(image);
  r.seed = seed;
  r.width = r.height = job.stage1.target_side;
  if (stage == Stage::stage1) {
    r.kind = gateway::RequestKind::img2img;
    r.model_id = job.stage1.model_id;
    r.strength = job.stage1.strength;
    r.num_inference_steps = job.stage1.num_inference_steps;
    r.guidance_scale = job.stage1.guidance_scale;
    r.num_images = job.stage1.num_images;
    if (branch == Branch::with_lora) r.lora = gateway::LoraAttachment{options_.lora_name, job.stage1.lora_scale};
  } else {
    r.kind = gateway::RequestKind::controlnet;
    r.model_id = job.stage2.model_id;
    r.conditioning_scale = job.stage2.conditioning_scale;
    r.num_inference_steps = job.stage2.num_inference_steps;
    r.guidance_scale = job.stage2.guidance_scale;
    r.num_images = job.stage2.num_images;
    if (branch == Branch::with_lora) r.lora = gateway::LoraAttachment{options_.lora_name, job.stage2.lora_scale};
  }
  return r;
}

StageRun Engine::fan_out(const ReconstructionJob& job, Stage stage, const Bytes& image, std::uint64_t seed) {
  const auto& branches = stage == Stage::stage1 ? job.stage1_branches : job.stage2_branches;
  std::map<Branch, std::future<BranchResult>> pending;
  for (auto branch : branches) {
    auto request = build_request(job, stage, branch, image, seed);
    pending.emplace(branch, std::async(std::launch::async, [this, request = std::move(request)]() {
                      BranchResult out;
                      out.seed = request.seed;
                      try {
                        auto result = client_.infer(request);
                        if (static_cast<int>(result.images.size()) != request.num_images) {
                          throw_error(ErrorCode::protocol_error, "backend returned " +
                                                                     std::to_string(result.images.size()) + " images");
                        }
                        for (std::size_t i = 0; i < result.images.size(); ++i) {
                          out.candidates.push_back({blobs_.put(result.images[i]), static_cast<int>(i)});
                        }
                        out.status = BranchStatus::ok;
                      } catch (const std::exception& e) {
                        out.status = BranchStatus::failed;
                        out.candidates.clear();
                        out.error = e.what();
                      }
                      return out;
                    }));
  }
  StageRun run;
  for (auto& [branch, future] : pending) run.branches[branch] = future.get();
  return run;
}

ReconstructionJob Engine::start_stage1(const std::string& id) {
  auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  auto job = load(id);
  if (job.state == JobState::completed) throw_error(ErrorCode::precondition_failed, "completed jobs are immutable");
  if (job.state != JobState::preprocessed) {
    throw_error(ErrorCode::precondition_failed, "stage 1 requires state preprocessed, job is " +
                                                    std::string(to_string(job.state)));
  }
  job.stage1_run.reset();
  job.stage2_run.reset();
  job.control_selection.reset();
  job.error.reset();
  transition(job, JobEvent::start_stage1,
             "noise_steps=" + std::to_string(effective_noise_steps(job.stage1.strength, job.stage1.num_inference_steps)) +
                 " branches=" + to_json(job.stage1_branches).dump());
  return job;
}

ReconstructionJob Engine::execute_stage1(const std::string& id) {
  auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  auto job = load(id);
  if (job.state != JobState::stage1_running) {
    throw_error(ErrorCode::precondition_failed, "stage 1 is not running for job '" + id + "'");
  }
  auto image = blobs_.get(job.preprocessed_ref);
  if (!image) {
    fail(job, "not-found", "preprocessed blob " + job.preprocessed_ref + " is missing", true);
    return job;
  }
  const auto seed = job.stage1.seed_mode == SeedMode::fixed ? job.stage1.seed : options_.seed_source();
  auto run = fan_out(job, Stage::stage1, *image, seed);
  const auto summary = branch_summary(run);
  const bool any_ok = std::any_of(run.branches.begin(), run.branches.end(),
                                  [](const auto& kv) { return kv.second.status == BranchStatus::ok; });
  job.stage1_run = std::move(run);
  if (any_ok) {
    transition(job, JobEvent::finish_stage1, summary);
  } else {
    fail(job, "transport-error", "every stage-1 branch failed: " + summary, true);
  }
  return job;
}

ReconstructionJob Engine::run_stage1(const std::string& id) {
  start_stage1(id);
  return execute_stage1(id);
}

ReconstructionJob Engine::start_stage2(const std::string& id, std::optional<std::string> control) {
  auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  auto job = load(id);
  if (job.state == JobState::completed) throw_error(ErrorCode::precondition_failed, "completed jobs are immutable");
  if (job.state != JobState::stage1_review) {
    throw_error(ErrorCode::precondition_failed, "stage 2 requires state stage1_review, job is " +
                                                    std::string(to_string(job.state)));
  }
  if (!control && job.control_selection) control = job.control_selection->candidate;
  if (!control || control->empty()) {
    throw_error(ErrorCode::precondition_failed, "stage 2 needs a stage-1 candidate as control image");
  }
  if (*control == job.source_ref || *control == job.preprocessed_ref || *control == job.archive_ref) {
    throw_error(ErrorCode::precondition_failed,
                "the raw input cannot be the control image; stage 2 only refines stage-1 outputs");
  }
  if (!job.stage1_run || !job.stage1_run->contains(*control)) {
    throw_error(ErrorCode::precondition_failed, "control image " + *control + " is not a stage-1 output of this job");
  }
  for (const auto& [b, r] : job.stage1_run->branches) {
    for (const auto& c : r.candidates) {
      if (c.hash == *control) job.control_selection = Selection{Stage::stage1, b, c.hash};
    }
  }
  job.stage2_run = StageRun{{}, *control};
  job.error.reset();
  transition(job, JobEvent::start_stage2, band_note(job.stage2.conditioning_scale));
  return job;
}

ReconstructionJob Engine::execute_stage2(const std::string& id) {
  auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  auto job = load(id);
  if (job.state != JobState::stage2_running || !job.stage2_run) {
    throw_error(ErrorCode::precondition_failed, "stage 2 is not running for job '" + id + "'");
  }
  const auto control = job.stage2_run->control;
  // Re-checked here so no request can ever carry a foreign control image.
  if (!job.stage1_run || !job.stage1_run->contains(control)) {
    fail(job, "precondition-failed", "control image is not a stage-1 output", false);
    return job;
  }
  auto image = blobs_.get(control);
  if (!image) {
    fail(job, "not-found", "control blob " + control + " is missing", true);
    return job;
  }
  const auto seed = job.stage2.seed_mode == SeedMode::fixed ? job.stage2.seed : options_.seed_source();
  auto run = fan_out(job, Stage::stage2, *image, seed);
  run.control = control;
  const auto summary = branch_summary(run);
  const bool any_ok = std::any_of(run.branches.begin(), run.branches.end(),
                                  [](const auto& kv) { return kv.second.status == BranchStatus::ok; });
  job.stage2_run = std::move(run);
  if (any_ok) {
    transition(job, JobEvent::finish_stage2, summary);
  } else {
    fail(job, "transport-error", "every stage-2 branch failed: " + summary, true);
  }
  return job;
}

ReconstructionJob Engine::run_stage2(const std::string& id, std::optional<std::string> control) {
  start_stage2(id, std::move(control));
  return execute_stage2(id);
}

ReconstructionJob Engine::select_candidate(const std::string& id, Stage stage, Branch branch,
                                           const std::string& candidate) {
  auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  auto job = load(id);
  if (job.state == JobState::completed) throw_error(ErrorCode::precondition_failed, "completed jobs are immutable");
  const auto& run = stage == Stage::stage1 ? job.stage1_run : job.stage2_run;
  bool found = false;
  if (run) {
    auto it = run->branches.find(branch);
    if (it != run->branches.end()) {
      for (const auto& c : it->second.candidates) found = found || c.hash == candidate;
    }
  }
  if (!found) {
    throw_error(ErrorCode::not_found, "no " + std::string(to_string(stage)) + " candidate " + candidate + " on branch " +
                                          std::string(to_string(branch)));
  }
  Selection sel{stage, branch, candidate};
  if (stage == Stage::stage1) {
    if (job.state != JobState::stage1_review) {
      throw_error(ErrorCode::precondition_failed, "stage-1 selection requires state stage1_review");
    }
    job.control_selection = sel;
    commit(job);
    notify(job, "selection", std::nullopt);
    return job;
  }
  if (job.state != JobState::stage2_review) {
    throw_error(ErrorCode::precondition_failed, "stage-2 selection requires state stage2_review");
  }
  job.selection = sel;
  transition(job, JobEvent::select_final, std::string(to_string(branch)) + " " + candidate);
  return job;
}

ReconstructionJob Engine::retry(const std::string& id) {
  auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  auto job = load(id);
  if (job.state != JobState::failed) throw_error(ErrorCode::precondition_failed, "only failed jobs can be retried");
  if (job.error && !job.error->retryable) {
    throw_error(ErrorCode::precondition_failed, "job failure is not retryable: " + job.error->message);
  }
  job.error.reset();
  const auto from = job.failed_from;
  if (from == JobState::stage1_running) job.stage1_run.reset();
  if (from == JobState::stage2_running) job.stage2_run.reset();
  transition(job, JobEvent::retry, "after failure in " + std::string(to_string(from)));
  return job;
}

ReconstructionJob Engine::rerun(const std::string& id) {
  const auto parent = get(id);
  if (is_running(parent.state)) throw_error(ErrorCode::precondition_failed, "cannot rerun a job while a stage runs");
  auto source = blobs_.get(parent.source_ref);
  if (!source) throw_error(ErrorCode::not_found, "source blob " + parent.source_ref + " is missing");
  ReconstructionJob job;
  job.id = options_.id_source();
  job.parent_id = parent.id;
  job.source_ref = parent.source_ref;
  job.facts = parent.facts;
  job.prompt = parent.prompt;
  job.stage1 = parent.stage1;
  job.stage2 = parent.stage2;
  job.stage1_branches = parent.stage1_branches;
  job.stage2_branches = parent.stage2_branches;
  job.warnings = parent.warnings;
  job.created_at = options_.clock();
  auto lock = lock_for(job.id);
  std::lock_guard guard(*lock);
  commit(job);
  notify(job, "created", std::nullopt);
  return job;
}

ReconstructionJob Engine::mark_interrupted(const std::string& id) {
  auto lock = lock_for(id);
  std::lock_guard guard(*lock);
  auto job = load(id);
  if (!is_running(job.state)) return job;
  fail(job, "interrupted", "stage interrupted before completion", true);
  return job;
}

Selection best_by_sharpness(const StageRun& run, Stage stage, const BlobStore& blobs) {
  std::vector<metrics::Candidate> candidates;
  std::map<std::string, Branch> owner;
  for (const auto& [branch, result] : run.branches) {
    for (const auto& c : result.candidates) {
      auto bytes = blobs.get(c.hash);
      if (!bytes) throw_error(ErrorCode::not_found, "candidate blob " + c.hash + " is missing");
      if (owner.emplace(c.hash, branch).second) candidates.push_back({c.hash, imaging::load_image(*bytes)});
    }
  }
  if (candidates.empty()) throw_error(ErrorCode::not_found, "stage run has no candidates");
  const auto report = metrics::compare_report(nullptr, candidates);
  const auto& best = report.ranked.front().id;
  return {stage, owner.at(best), best};
}

ReconstructionJob run_to_completion(Engine& engine, const BlobStore& blobs, const std::string& id) {
  auto job = engine.get(id);
  if (job.state == JobState::created) job = engine.preprocess(id);
  if (job.state == JobState::preprocessed) job = engine.run_stage1(id);
  if (job.state == JobState::stage1_review) {
    const auto pick = best_by_sharpness(*job.stage1_run, Stage::stage1, blobs);
    engine.select_candidate(id, pick.stage, pick.branch, pick.candidate);
    job = engine.run_stage2(id);
  }
  if (job.state == JobState::stage2_review) {
    const auto pick = best_by_sharpness(*job.stage2_run, Stage::stage2, blobs);
    job = engine.select_candidate(id, pick.stage, pick.branch, pick.candidate);
  }
  return job;
}

}  // namespace upscaler::pipeline
