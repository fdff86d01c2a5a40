#pragma once

#include <optional>
#include <string_view>
#include <vector>

namespace upscaler::pipeline {

enum class JobState {
  created,
  preprocessed,
  stage1_running,
  stage1_review,
  stage2_running,
  stage2_review,
  completed,
  failed,
};

enum class JobEvent {
  preprocess,    // created -> preprocessed
  start_stage1,  // preprocessed -> stage1_running
  finish_stage1,
  start_stage2,
  finish_stage2,
  select_final,  // stage2_review -> completed
  fail,          // created | stage1_running | stage2_running -> failed
  retry,         // failed -> ready state preceding the failure
};

inline constexpr JobState kAllStates[] = {
    JobState::created,        JobState::preprocessed,  JobState::stage1_running, JobState::stage1_review,
    JobState::stage2_running, JobState::stage2_review, JobState::completed,      JobState::failed,
};
inline constexpr JobEvent kAllEvents[] = {
    JobEvent::preprocess,    JobEvent::start_stage1, JobEvent::finish_stage1, JobEvent::start_stage2,
    JobEvent::finish_stage2, JobEvent::select_final, JobEvent::fail,          JobEvent::retry,
};

std::string_view to_string(JobState s) noexcept;
std::string_view to_string(JobEvent e) noexcept;
std::optional<JobState> job_state_from_string(std::string_view name) noexcept;
std::optional<JobEvent> job_event_from_string(std::string_view name) noexcept;

bool is_running(JobState s) noexcept;

/// The state a retry returns to after failing in `failed_from`.
JobState retry_target(JobState failed_from) noexcept;

/// Transition function. `failed_from` is the state the job failed in and only
/// matters for retry. Returns nullopt for transitions outside the graph.
std::optional<JobState> next_state(JobState current, JobEvent event,
                                   JobState failed_from = JobState::created) noexcept;

/// True when `to` is reachable from `from` by one edge of the declared graph.
bool is_legal_edge(JobState from, JobState to) noexcept;

}  // namespace upscaler::pipeline
