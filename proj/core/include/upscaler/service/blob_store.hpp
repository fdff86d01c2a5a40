#pragma once

#include <filesystem>

#include "upscaler/pipeline/store.hpp"

namespace upscaler::service {

/// Writes `bytes` to a sibling temp file, flushes, then renames over `path`.
void atomic_write(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Blobs live at <root>/<first two hex digits>/<hash>. Blobs are immutable, so
// reads take no lock.
class FsBlobStore final : public pipeline::BlobStore {
 public:
  /// Creates the directory; throws io-error when it cannot be created or written.
  explicit FsBlobStore(std::filesystem::path root);

  std::string put(std::span<const std::uint8_t> bytes) override;
  std::optional<Bytes> get(const std::string& hash) const override;
  bool contains(const std::string& hash) const override;
  std::vector<std::string> list() const override;
  bool remove(const std::string& hash) override;

  std::filesystem::path path_for(const std::string& hash) const;

 private:
  std::filesystem::path root_;
};

}  // namespace upscaler::service
