#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "upscaler/pipeline/config.hpp"
#include "upscaler/pipeline/state.hpp"
#include "upscaler/prompt/scene.hpp"

namespace upscaler::pipeline {

struct CandidateRef {
  std::string hash;  // sha256 of the PNG blob
  int index = 0;     // position within the branch's batch

  friend bool operator==(const CandidateRef&, const CandidateRef&) = default;
};

enum class BranchStatus { pending, ok, failed };
std::string_view to_string(BranchStatus s) noexcept;

struct BranchResult {
  BranchStatus status = BranchStatus::pending;
  std::vector<CandidateRef> candidates;
  std::uint64_t seed = 0;
  std::string error;
};

// One stage run: the control image it consumed (stage 2 only) and a result per branch.
struct StageRun {
  std::map<Branch, BranchResult> branches;
  std::string control;  // stage 2: hash of the stage-1 candidate used as control

  std::size_t candidate_count() const noexcept;
  bool contains(const std::string& hash) const noexcept;
};

struct Selection {
  Stage stage = Stage::stage1;
  Branch branch = Branch::without_lora;
  std::string candidate;

  friend bool operator==(const Selection&, const Selection&) = default;
};

struct JobError {
  std::string code;
  std::string message;
  bool retryable = true;
};

// One transition. Carries no wall-clock data so logs of seeded runs compare equal.
struct StateLogEntry {
  JobState from = JobState::created;
  JobState to = JobState::created;
  JobEvent event = JobEvent::preprocess;
  std::string detail;

  friend bool operator==(const StateLogEntry&, const StateLogEntry&) = default;
};

struct ReconstructionJob {
  std::string id;
  std::optional<std::string> parent_id;
  std::string source_ref;        // sha256 of the uploaded bytes
  std::string preprocessed_ref;  // sha256 of the standardized PNG
  std::string archive_ref;       // optional 256x256 standardization
  prompt::SceneFacts facts;
  std::string prompt;
  Stage1Config stage1;
  Stage2Config stage2;
  BranchSet stage1_branches = kDefaultStage1Branches;
  BranchSet stage2_branches = kDefaultStage2Branches;
  JobState state = JobState::created;
  JobState failed_from = JobState::created;
  std::optional<StageRun> stage1_run;
  std::optional<StageRun> stage2_run;
  std::optional<Selection> control_selection;  // stage-1 pick feeding stage 2
  std::optional<Selection> selection;          // final stage-2 pick
  std::optional<JobError> error;
  std::vector<std::string> warnings;
  std::vector<StateLogEntry> log;
  std::string created_at;
  std::string updated_at;
  std::uint64_t revision = 0;

  /// Every blob hash the record references.
  std::vector<std::string> blob_refs() const;
};

nlohmann::json to_json(const StateLogEntry& entry);
nlohmann::json to_json(const ReconstructionJob& job);
/// Throws parse-error on malformed records.
ReconstructionJob job_from_json(const nlohmann::json& doc);

}  // namespace upscaler::pipeline
