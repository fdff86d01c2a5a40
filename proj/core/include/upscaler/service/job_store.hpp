#pragma once

#include <filesystem>
#include <mutex>

#include "upscaler/pipeline/store.hpp"

namespace upscaler::service {

// One JSON document per job at <root>/<id>.json, replaced atomically on save.
class FsJobRepository final : public pipeline::JobRepository {
 public:
  explicit FsJobRepository(std::filesystem::path root);

  void save(const pipeline::ReconstructionJob& job) override;
  std::optional<pipeline::ReconstructionJob> load(const std::string& id) const override;
  std::vector<pipeline::ReconstructionJob> list() const override;

  /// Files that failed to parse during the last list() call.
  std::vector<std::string> corrupt() const;

 private:
  std::filesystem::path path_for(const std::string& id) const;

  std::filesystem::path root_;
  mutable std::mutex mu_;
  mutable std::vector<std::string> corrupt_;
};

}  // namespace upscaler::service
