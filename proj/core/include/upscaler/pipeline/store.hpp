#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "upscaler/hash.hpp"
#include "upscaler/pipeline/job.hpp"

namespace upscaler::pipeline {

// Content-addressed blob storage keyed by lowercase hex SHA-256.
class BlobStore {
 public:
  virtual ~BlobStore() = default;
  /// Stores `bytes` (a no-op when already present) and returns their hash.
  virtual std::string put(std::span<const std::uint8_t> bytes) = 0;
  virtual std::optional<Bytes> get(const std::string& hash) const = 0;
  virtual bool contains(const std::string& hash) const = 0;
  virtual std::vector<std::string> list() const = 0;
  virtual bool remove(const std::string& hash) = 0;
};

class JobRepository {
 public:
  virtual ~JobRepository() = default;
  virtual void save(const ReconstructionJob& job) = 0;
  virtual std::optional<ReconstructionJob> load(const std::string& id) const = 0;
  /// All jobs, ordered by id.
  virtual std::vector<ReconstructionJob> list() const = 0;
};

class MemoryBlobStore final : public BlobStore {
 public:
  std::string put(std::span<const std::uint8_t> bytes) override;
  std::optional<Bytes> get(const std::string& hash) const override;
  bool contains(const std::string& hash) const override;
  std::vector<std::string> list() const override;
  bool remove(const std::string& hash) override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, Bytes> blobs_;
};

class MemoryJobRepository final : public JobRepository {
 public:
  void save(const ReconstructionJob& job) override;
  std::optional<ReconstructionJob> load(const std::string& id) const override;
  std::vector<ReconstructionJob> list() const override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, ReconstructionJob> jobs_;
};

/// Removes every blob no job references. Returns the removed hashes.
std::vector<std::string> collect_garbage(BlobStore& blobs, const JobRepository& jobs);

}  // namespace upscaler::pipeline
