#include "upscaler/pipeline/state.hpp"

#include <utility>

namespace upscaler::pipeline {

namespace {

constexpr std::pair<JobState, std::string_view> kStateNames[] = {
    {JobState::created, "created"},
    {JobState::preprocessed, "preprocessed"},
    {JobState::stage1_running, "stage1_running"},
    {JobState::stage1_review, "stage1_review"},
    {JobState::stage2_running, "stage2_running"},
    {JobState::stage2_review, "stage2_review"},
    {JobState::completed, "completed"},
    {JobState::failed, "failed"},
};

constexpr std::pair<JobEvent, std::string_view> kEventNames[] = {
    {JobEvent::preprocess, "preprocess"},
    {JobEvent::start_stage1, "start_stage1"},
    {JobEvent::finish_stage1, "finish_stage1"},
    {JobEvent::start_stage2, "start_stage2"},
    {JobEvent::finish_stage2, "finish_stage2"},
    {JobEvent::select_final, "select_final"},
    {JobEvent::fail, "fail"},
    {JobEvent::retry, "retry"},
};

}  // namespace

std::string_view to_string(JobState s) noexcept {
  for (const auto& [k, v] : kStateNames)
    if (k == s) return v;
  return "unknown";
}

std::string_view to_string(JobEvent e) noexcept {
  for (const auto& [k, v] : kEventNames)
    if (k == e) return v;
  return "unknown";
}

std::optional<JobState> job_state_from_string(std::string_view name) noexcept {
  for (const auto& [k, v] : kStateNames)
    if (v == name) return k;
  return std::nullopt;
}

std::optional<JobEvent> job_event_from_string(std::string_view name) noexcept {
  for (const auto& [k, v] : kEventNames)
    if (v == name) return k;
  return std::nullopt;
}

bool is_running(JobState s) noexcept { return s == JobState::stage1_running || s == JobState::stage2_running; }

JobState retry_target(JobState failed_from) noexcept {
  switch (failed_from) {
    case JobState::stage1_running: return JobState::preprocessed;
    case JobState::stage2_running: return JobState::stage1_review;
    default: return JobState::created;
  }
}

std::optional<JobState> next_state(JobState s, JobEvent e, JobState failed_from) noexcept {
  switch (e) {
    case JobEvent::preprocess:
      if (s == JobState::created) return JobState::preprocessed;
      break;
    case JobEvent::start_stage1:
      if (s == JobState::preprocessed) return JobState::stage1_running;
      break;
    case JobEvent::finish_stage1:
      if (s == JobState::stage1_running) return JobState::stage1_review;
      break;
    case JobEvent::start_stage2:
      if (s == JobState::stage1_review) return JobState::stage2_running;
      break;
    case JobEvent::finish_stage2:
      if (s == JobState::stage2_running) return JobState::stage2_review;
      break;
    case JobEvent::select_final:
      if (s == JobState::stage2_review) return JobState::completed;
      break;
    case JobEvent::fail:
      if (s == JobState::created || is_running(s)) return JobState::failed;
      break;
    case JobEvent::retry:
      if (s == JobState::failed &&
          (failed_from == JobState::created || failed_from == JobState::stage1_running ||
           failed_from == JobState::stage2_running)) {
        return retry_target(failed_from);
      }
      break;
  }
  return std::nullopt;
}

bool is_legal_edge(JobState from, JobState to) noexcept {
  for (auto e : kAllEvents) {
    for (auto origin : {JobState::created, JobState::stage1_running, JobState::stage2_running}) {
      if (next_state(from, e, origin) == to) return true;
    }
  }
  return false;
}

}  // namespace upscaler::pipeline
