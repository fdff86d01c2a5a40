#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "upscaler/gateway/wire.hpp"
#include "upscaler/pipeline/job.hpp"
#include "upscaler/pipeline/store.hpp"

namespace upscaler::pipeline {

struct JobSpec {
  Stage1Config stage1;
  Stage2Config stage2;
  BranchSet stage1_branches = kDefaultStage1Branches;
  BranchSet stage2_branches = kDefaultStage2Branches;
};

struct EngineEvent {
  std::uint64_t seq = 0;
  std::string job_id;
  std::string kind;  // "created", "transition", "selection"
  JobState state = JobState::created;
  std::optional<StateLogEntry> entry;  // transitions only
};

nlohmann::json to_json(const EngineEvent& event);

using EngineListener = std::function<void(const EngineEvent&)>;

struct EngineOptions {
  std::function<std::uint64_t()> seed_source;  // random-mode seeds; default std::random_device
  std::function<std::string()> id_source;      // default: random 64-bit hex
  std::function<std::string()> clock;          // default: UTC ISO-8601
  std::string lora_name = "football_lora";
};

// The reconstruction state machine. Transitions on one job are serialized;
// different jobs proceed independently. Branches within a stage run in parallel.
class Engine {
 public:
  Engine(BlobStore& blobs, JobRepository& jobs, gateway::InferenceClient& client, EngineOptions options = {});

  /// Decodes the image, validates facts and configs, stores the source and
  /// derives the prompt. Throws decode-error, validation-error or config-error.
  ReconstructionJob create_job(std::span<const std::uint8_t> image, const prompt::SceneFacts& facts,
                               const JobSpec& spec = {});

  /// Lanczos square standardization to stage1.target_side. Idempotent once preprocessed.
  ReconstructionJob preprocess(const std::string& id);

  /// preprocessed -> stage1_running. Throws precondition-failed from any other state.
  ReconstructionJob start_stage1(const std::string& id);
  /// Fans the img2img request out over the stage-1 branches, then -> stage1_review
  /// (or failed when every branch failed).
  ReconstructionJob execute_stage1(const std::string& id);
  ReconstructionJob run_stage1(const std::string& id);

  /// stage1_review -> stage2_running. The control image defaults to the stage-1
  /// selection and must be a stage-1 output of this job (precondition-failed otherwise).
  ReconstructionJob start_stage2(const std::string& id, std::optional<std::string> control = std::nullopt);
  ReconstructionJob execute_stage2(const std::string& id);
  ReconstructionJob run_stage2(const std::string& id, std::optional<std::string> control = std::nullopt);

  /// Stage 1: records the control precursor. Stage 2: records the outcome and
  /// completes the job. Throws not-found for unknown candidates and
  /// precondition-failed after completion.
  ReconstructionJob select_candidate(const std::string& id, Stage stage, Branch branch, const std::string& candidate);

  /// failed -> the ready state before the failure. Throws precondition-failed otherwise.
  ReconstructionJob retry(const std::string& id);
  /// New job over the same source, facts and configs, linked by parent_id.
  ReconstructionJob rerun(const std::string& id);
  /// A running job whose worker vanished (e.g. after a restart) becomes failed, retryable.
  ReconstructionJob mark_interrupted(const std::string& id);

  /// Throws not-found.
  ReconstructionJob get(const std::string& id) const;
  std::vector<ReconstructionJob> list() const;

  std::uint64_t subscribe(EngineListener listener);
  void unsubscribe(std::uint64_t token);

  /// The wire request one branch of one stage sends.
  gateway::InferenceRequest build_request(const ReconstructionJob& job, Stage stage, Branch branch, Bytes image,
                                          std::uint64_t seed) const;

 private:
  std::shared_ptr<std::mutex> lock_for(const std::string& id);
  ReconstructionJob load(const std::string& id) const;
  void transition(ReconstructionJob& job, JobEvent event, std::string detail);
  void fail(ReconstructionJob& job, std::string code, std::string message, bool retryable);
  void commit(ReconstructionJob& job);
  void notify(const ReconstructionJob& job, const std::string& kind, std::optional<StateLogEntry> entry);
  StageRun fan_out(const ReconstructionJob& job, Stage stage, const Bytes& image, std::uint64_t seed);

  BlobStore& blobs_;
  JobRepository& jobs_;
  gateway::InferenceClient& client_;
  EngineOptions options_;

  std::mutex locks_mu_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;

  std::mutex listeners_mu_;
  std::map<std::uint64_t, EngineListener> listeners_;
  std::uint64_t next_token_ = 1;
  std::atomic<std::uint64_t> seq_{0};
};

/// Blind pick: the candidate of `run` ranked first by sharpness (ties by hash).
/// Throws not-found when the run has no candidates.
Selection best_by_sharpness(const StageRun& run, Stage stage, const BlobStore& blobs);

/// Drives a job from created to completed, picking candidates with
/// best_by_sharpness at both review points.
ReconstructionJob run_to_completion(Engine& engine, const BlobStore& blobs, const std::string& id);

}  // namespace upscaler::pipeline
