#include "upscaler/pipeline/store.hpp"

#include <set>

namespace upscaler::pipeline {

std::string MemoryBlobStore::put(std::span<const std::uint8_t> bytes) {
  auto hash = sha256_hex(bytes);
  std::lock_guard lock(mu_);
  blobs_.try_emplace(hash, bytes.begin(), bytes.end());
  return hash;
}

std::optional<Bytes> MemoryBlobStore::get(const std::string& hash) const {
  std::lock_guard lock(mu_);
  auto it = blobs_.find(hash);
  if (it == blobs_.end()) return std::nullopt;
  return it->second;
}

bool MemoryBlobStore::contains(const std::string& hash) const {
  std::lock_guard lock(mu_);
  return blobs_.count(hash) > 0;
}

std::vector<std::string> MemoryBlobStore::list() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [h, b] : blobs_) out.push_back(h);
  return out;
}

bool MemoryBlobStore::remove(const std::string& hash) {
  std::lock_guard lock(mu_);
  return blobs_.erase(hash) > 0;
}

void MemoryJobRepository::save(const ReconstructionJob& job) {
  std::lock_guard lock(mu_);
  jobs_[job.id] = job;
}

std::optional<ReconstructionJob> MemoryJobRepository::load(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::vector<ReconstructionJob> MemoryJobRepository::list() const {
  std::lock_guard lock(mu_);
  std::vector<ReconstructionJob> out;
  for (const auto& [id, j] : jobs_) out.push_back(j);
  return out;
}

std::vector<std::string> collect_garbage(BlobStore& blobs, const JobRepository& jobs) {
  std::set<std::string> live;
  for (const auto& job : jobs.list())
    for (auto& ref : job.blob_refs()) live.insert(std::move(ref));
  std::vector<std::string> removed;
  for (const auto& hash : blobs.list()) {
    if (!live.count(hash) && blobs.remove(hash)) removed.push_back(hash);
  }
  return removed;
}

}  // namespace upscaler::pipeline
