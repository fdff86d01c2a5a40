#include "upscaler/service/job_store.hpp"

#include <algorithm>

#include "upscaler/error.hpp"
#include "upscaler/imaging/codec.hpp"
#include "upscaler/service/blob_store.hpp"

namespace fs = std::filesystem;

namespace upscaler::service {

namespace {

bool safe_id(const std::string& id) {
  return !id.empty() && id.size() <= 128 &&
         id.find_first_not_of("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-_") == std::string::npos;
}

}  // namespace

FsJobRepository::FsJobRepository(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec || !fs::is_directory(root_)) throw_error(ErrorCode::io_error, "job store " + root_.string() + " unusable");
}

fs::path FsJobRepository::path_for(const std::string& id) const { return root_ / (id + ".json"); }

void FsJobRepository::save(const pipeline::ReconstructionJob& job) {
  if (!safe_id(job.id)) throw_error(ErrorCode::invalid_argument, "job id '" + job.id + "' is not filesystem-safe");
  const auto text = pipeline::to_json(job).dump(2) + "\n";
  std::lock_guard lock(mu_);
  atomic_write(path_for(job.id), std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::optional<pipeline::ReconstructionJob> FsJobRepository::load(const std::string& id) const {
  if (!safe_id(id)) return std::nullopt;
  const auto path = path_for(id);
  std::lock_guard lock(mu_);
  if (!fs::exists(path)) return std::nullopt;
  const auto bytes = imaging::read_file(path);
  try {
    return pipeline::job_from_json(nlohmann::json::parse(bytes.begin(), bytes.end()));
  } catch (const nlohmann::json::exception& e) {
    throw_error(ErrorCode::parse_error, "job record " + path.string() + " is corrupt: " + e.what());
  }
}

std::vector<pipeline::ReconstructionJob> FsJobRepository::list() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
  }
  std::sort(ids.begin(), ids.end());
  std::vector<pipeline::ReconstructionJob> out;
  std::vector<std::string> bad;
  for (const auto& id : ids) {
    try {
      if (auto job = load(id)) out.push_back(std::move(*job));
    } catch (const Error&) {
      bad.push_back(id);
    }
  }
  std::lock_guard lock(mu_);
  corrupt_ = std::move(bad);
  return out;
}

std::vector<std::string> FsJobRepository::corrupt() const {
  std::lock_guard lock(mu_);
  return corrupt_;
}

}  // namespace upscaler::service
