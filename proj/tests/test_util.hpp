#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <unistd.h>
#include <vector>

#include "morkit/morkit.hpp"
#include "morkit/reference.hpp"

namespace morkit::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "morkit") {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
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

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::size_t count_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) n += line.empty() ? 0 : 1;
  return n;
}

/// Horizontal depth ramp: d(x, y) = x * step.
inline DepthMap ramp_depth(std::size_t w, std::size_t h, double step = 1.0) {
  std::vector<double> d(w * h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) d[y * w + x] = static_cast<double>(x) * step;
  }
  return DepthMap(w, h, std::move(d));
}

/// Writes `count` clean PNG / depth PFM pairs named sample_000, sample_001, ...
inline void write_pairs(const std::filesystem::path& clean_dir, const std::filesystem::path& depth_dir,
                        std::size_t count, std::size_t w, std::size_t h) {
  std::filesystem::create_directories(clean_dir);
  std::filesystem::create_directories(depth_dir);
  for (std::size_t i = 0; i < count; ++i) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "sample_%03zu", i);
    save_image(reference::textured_image(w, h, 3, 100 + i), clean_dir / (std::string(stem) + ".png"));
    const DepthMap d = ramp_depth(w, h, 200.0 / static_cast<double>(w));
    write_pfm(depth_dir / (std::string(stem) + ".pfm"), w, h, d.data());
  }
}

}  // namespace morkit::testing
