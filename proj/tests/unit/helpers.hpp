#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "f2v/core/types.hpp"
#include "f2v/ingest/dataset.hpp"

namespace testutil {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() / ("f2v_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
};

inline std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// relative path -> file bytes, for whole-tree comparison
inline std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_bytes(e.path());
  }
  return out;
}

inline f2v::FlowField uniform_flow(int h, int w, float u, float v) { return f2v::FlowField(h, w, u, v); }

// Clip of solid gray frames with uniform flow; handy where pixel content is irrelevant.
inline f2v::Clip gray_clip(const std::string& id, int frames, int size, float value = 0.5f, float u = 1.0f) {
  f2v::Clip c;
  c.clip_id = id;
  for (int t = 0; t < frames; ++t) c.frames.push_back({f2v::Image(3, size, size, value), t});
  for (int t = 0; t + 1 < frames; ++t) c.flows.push_back(uniform_flow(size, size, u, 0.0f));
  return c;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testutil
