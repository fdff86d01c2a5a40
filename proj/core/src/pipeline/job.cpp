#include "upscaler/pipeline/job.hpp"

#include "upscaler/error.hpp"

namespace upscaler::pipeline {

using nlohmann::json;

std::string_view to_string(BranchStatus s) noexcept {
  switch (s) {
    case BranchStatus::pending: return "pending";
    case BranchStatus::ok: return "ok";
    case BranchStatus::failed: return "failed";
  }
  return "unknown";
}

std::size_t StageRun::candidate_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [b, r] : branches) n += r.candidates.size();
  return n;
}

bool StageRun::contains(const std::string& hash) const noexcept {
  for (const auto& [b, r] : branches)
    for (const auto& c : r.candidates)
      if (c.hash == hash) return true;
  return false;
}

std::vector<std::string> ReconstructionJob::blob_refs() const {
  std::vector<std::string> refs;
  for (const auto* h : {&source_ref, &preprocessed_ref, &archive_ref})
    if (!h->empty()) refs.push_back(*h);
  for (const auto* run : {&stage1_run, &stage2_run}) {
    if (!*run) continue;
    for (const auto& [b, r] : (*run)->branches)
      for (const auto& c : r.candidates) refs.push_back(c.hash);
  }
  return refs;
}

json to_json(const StateLogEntry& e) {
  return {{"from", to_string(e.from)}, {"to", to_string(e.to)}, {"event", to_string(e.event)}, {"detail", e.detail}};
}

namespace {

json run_json(const StageRun& run) {
  json branches = json::object();
  for (const auto& [b, r] : run.branches) {
    json cands = json::array();
    for (const auto& c : r.candidates) cands.push_back({{"hash", c.hash}, {"index", c.index}});
    branches[std::string(to_string(b))] = {
        {"status", to_string(r.status)}, {"candidates", cands}, {"seed", r.seed}, {"error", r.error}};
  }
  json out = {{"branches", branches}};
  if (!run.control.empty()) out["control"] = run.control;
  return out;
}

json selection_json(const std::optional<Selection>& s) {
  if (!s) return nullptr;
  return {{"stage", to_string(s->stage)}, {"branch", to_string(s->branch)}, {"candidate", s->candidate}};
}

JobState state_of(const json& v) {
  auto s = job_state_from_string(v.get<std::string>());
  if (!s) throw_error(ErrorCode::parse_error, "unknown job state '" + v.get<std::string>() + "'");
  return *s;
}

StageRun run_from(const json& doc) {
  StageRun run;
  run.control = doc.value("control", std::string());
  for (const auto& [name, r] : doc.at("branches").items()) {
    BranchResult br;
    const auto status = r.at("status").get<std::string>();
    br.status = status == "ok" ? BranchStatus::ok : status == "failed" ? BranchStatus::failed : BranchStatus::pending;
    for (const auto& c : r.at("candidates")) br.candidates.push_back({c.at("hash"), c.at("index")});
    br.seed = r.value("seed", std::uint64_t{0});
    br.error = r.value("error", std::string());
    run.branches[branch_from_string(name)] = std::move(br);
  }
  return run;
}

std::optional<Selection> selection_from(const json& doc) {
  if (doc.is_null()) return std::nullopt;
  return Selection{stage_from_string(doc.at("stage").get<std::string>()),
                   branch_from_string(doc.at("branch").get<std::string>()), doc.at("candidate").get<std::string>()};
}

}  // namespace

json to_json(const ReconstructionJob& j) {
  json log = json::array();
  for (const auto& e : j.log) log.push_back(to_json(e));
  json candidates = json::object();
  if (j.stage1_run) candidates["stage1"] = run_json(*j.stage1_run);
  if (j.stage2_run) candidates["stage2"] = run_json(*j.stage2_run);
  json error = nullptr;
  if (j.error) error = {{"code", j.error->code}, {"message", j.error->message}, {"retryable", j.error->retryable}};
  return {
      {"id", j.id},
      {"parent_id", j.parent_id ? json(*j.parent_id) : json(nullptr)},
      {"source_ref", j.source_ref},
      {"preprocessed_ref", j.preprocessed_ref},
      {"archive_ref", j.archive_ref},
      {"facts", prompt::to_json(j.facts)},
      {"prompt", j.prompt},
      {"stage1", to_json(j.stage1)},
      {"stage2", to_json(j.stage2)},
      {"branches", {{"stage1", to_json(j.stage1_branches)}, {"stage2", to_json(j.stage2_branches)}}},
      {"state", to_string(j.state)},
      {"failed_from", to_string(j.failed_from)},
      {"candidates", candidates},
      {"control_selection", selection_json(j.control_selection)},
      {"selection", selection_json(j.selection)},
      {"error", error},
      {"warnings", j.warnings},
      {"log", log},
      {"created_at", j.created_at},
      {"updated_at", j.updated_at},
      {"revision", j.revision},
  };
}

ReconstructionJob job_from_json(const json& doc) {
  ReconstructionJob j;
  try {
    j.id = doc.at("id").get<std::string>();
    if (doc.contains("parent_id") && !doc["parent_id"].is_null()) j.parent_id = doc["parent_id"].get<std::string>();
    j.source_ref = doc.at("source_ref").get<std::string>();
    j.preprocessed_ref = doc.value("preprocessed_ref", std::string());
    j.archive_ref = doc.value("archive_ref", std::string());
    j.facts = prompt::facts_from_json(doc.at("facts"));
    j.prompt = doc.at("prompt").get<std::string>();
    j.stage1 = stage1_from_json(doc.at("stage1"));
    j.stage2 = stage2_from_json(doc.at("stage2"));
    j.stage1_branches = branches_from_json(doc.at("branches").at("stage1"));
    j.stage2_branches = branches_from_json(doc.at("branches").at("stage2"));
    j.state = state_of(doc.at("state"));
    j.failed_from = state_of(doc.at("failed_from"));
    const auto& cands = doc.at("candidates");
    if (cands.contains("stage1")) j.stage1_run = run_from(cands["stage1"]);
    if (cands.contains("stage2")) j.stage2_run = run_from(cands["stage2"]);
    j.control_selection = selection_from(doc.at("control_selection"));
    j.selection = selection_from(doc.at("selection"));
    if (!doc.at("error").is_null()) {
      const auto& e = doc["error"];
      j.error = JobError{e.at("code"), e.at("message"), e.value("retryable", true)};
    }
    j.warnings = doc.value("warnings", std::vector<std::string>{});
    for (const auto& e : doc.at("log")) {
      auto ev = job_event_from_string(e.at("event").get<std::string>());
      if (!ev) throw_error(ErrorCode::parse_error, "unknown job event in log");
      j.log.push_back({state_of(e.at("from")), state_of(e.at("to")), *ev, e.value("detail", std::string())});
    }
    j.created_at = doc.value("created_at", std::string());
    j.updated_at = doc.value("updated_at", std::string());
    j.revision = doc.value("revision", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw_error(ErrorCode::parse_error, std::string("malformed job record: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse_error) throw;
    throw_error(ErrorCode::parse_error, std::string("malformed job record: ") + e.what());
  }
  return j;
}

}  // namespace upscaler::pipeline
