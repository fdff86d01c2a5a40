#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "upscaler/imaging/image.hpp"
#include "upscaler/rng.hpp"

namespace upscaler::test {

inline std::filesystem::path data_dir() { return UPSCALER_TEST_DATA_DIR; }
inline std::filesystem::path golden_dir() { return UPSCALER_GOLDEN_DIR; }

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("upscaler-test-" + std::to_string(rd()) + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline imaging::ImageBuffer random_image(int w, int h, std::uint64_t seed) {
  Rng rng(seed);
  imaging::ImageBuffer img(w, h);
  for (auto& v : img.pixels()) v = static_cast<float>(rng.uniform());
  return img;
}

}  // namespace upscaler::test
