#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "surmr/core/quality.hpp"

namespace surmr::test {

inline core::QualityLadder make_ladder(const std::string& id, int k) {
  core::QualityLadder l;
  l.ladder_id = id;
  l.original_ref = id + "_orig.png";
  l.codec_tag = "test";
  for (int i = 1; i <= k; ++i) l.rungs.push_back({i, 10LL * i, id + "_r" + std::to_string(i) + ".png"});
  l.normalize_and_validate();
  return l;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("surmr_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace surmr::test
