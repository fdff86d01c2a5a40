#include "upscaler/service/blob_store.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include "upscaler/error.hpp"
#include "upscaler/imaging/codec.hpp"

namespace fs = std::filesystem;

namespace upscaler::service {

namespace {

bool is_hash(const std::string& s) {
  return s.size() == 64 && s.find_first_not_of("0123456789abcdef") == std::string::npos;
}

}  // namespace

void atomic_write(const fs::path& path, std::span<const std::uint8_t> bytes) {
  static std::atomic<std::uint64_t> counter{0};
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
  auto tmp = path;
  tmp += ".tmp." + std::to_string(tid) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw_error(ErrorCode::io_error, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw_error(ErrorCode::io_error, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw_error(ErrorCode::io_error, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

FsBlobStore::FsBlobStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec || !fs::is_directory(root_)) {
    throw_error(ErrorCode::io_error, "blob store " + root_.string() + " is not a writable directory");
  }
  const auto probe = root_ / ".write-probe";
  const std::uint8_t byte = 0;
  atomic_write(probe, std::span(&byte, 1));
  fs::remove(probe, ec);
}

fs::path FsBlobStore::path_for(const std::string& hash) const { return root_ / hash.substr(0, 2) / hash; }

std::string FsBlobStore::put(std::span<const std::uint8_t> bytes) {
  auto hash = sha256_hex(bytes);
  const auto path = path_for(hash);
  if (!fs::exists(path)) atomic_write(path, bytes);
  return hash;
}

std::optional<Bytes> FsBlobStore::get(const std::string& hash) const {
  if (!is_hash(hash)) return std::nullopt;
  const auto path = path_for(hash);
  if (!fs::exists(path)) return std::nullopt;
  return imaging::read_file(path);
}

bool FsBlobStore::contains(const std::string& hash) const { return is_hash(hash) && fs::exists(path_for(hash)); }

std::vector<std::string> FsBlobStore::list() const {
  std::vector<std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root_)) {
    if (!entry.is_regular_file()) continue;
    auto name = entry.path().filename().string();
    if (is_hash(name)) out.push_back(std::move(name));
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool FsBlobStore::remove(const std::string& hash) {
  if (!is_hash(hash)) return false;
  std::error_code ec;
  return fs::remove(path_for(hash), ec);
}

}  // namespace upscaler::service
