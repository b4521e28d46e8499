/* Copyright 2026 The ShadowForge Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */
#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "shadowforge/core/random.hpp"
#include "shadowforge/core/vec.hpp"
#include "shadowforge/geometry/mesh.hpp"

namespace sftest {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = std::filesystem::temp_directory_path() /
            ("sf_" + tag + "_" + (info ? std::string(info->name()) : std::string("x")) + "_" +
             std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline shadowforge::Vec3 random_vec3(shadowforge::Rng& rng, double scale = 1.0) {
  return scale * shadowforge::Vec3{shadowforge::standard_normal(rng), shadowforge::standard_normal(rng),
                                   shadowforge::standard_normal(rng)};
}

inline std::filesystem::path asset(const std::string& rel) { return std::filesystem::path(SHADOWFORGE_ASSET_DIR) / rel; }
inline std::filesystem::path fixture(const std::string& rel) { return std::filesystem::path(SHADOWFORGE_FIXTURE_DIR) / rel; }

}  // namespace sftest
