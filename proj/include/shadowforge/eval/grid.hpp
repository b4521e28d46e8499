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

#include <algorithm>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "shadowforge/scene/camera.hpp"
#include "shadowforge/scene/model.hpp"

namespace shadowforge {

struct EvalGrid {
  std::vector<double> azim, elev, dist;

  size_t size() const { return azim.size() * elev.size() * dist.size(); }

  // Views in azim-major, then elev, then dist order.
  std::vector<CameraParams> views(const CameraParams& base = {}) const {
    std::vector<CameraParams> out;
    out.reserve(size());
    for (double a : azim)
      for (double e : elev)
        for (double d : dist) {
          CameraParams c = base;
          c.azim = a;
          c.elev = e;
          c.dist = d;
          out.push_back(c);
        }
    return out;
  }
  bool operator==(const EvalGrid&) const = default;
};

inline void validate(const EvalGrid& g) {
  auto check = [](std::vector<double> v, const char* name, auto&& ok) {
    if (v.empty()) throw DomainError(std::string("grid has no ") + name + " values");
    for (double x : v)
      if (!ok(x)) throw DomainError(std::string("grid ") + name + " value out of range");
    std::sort(v.begin(), v.end());
    if (std::adjacent_find(v.begin(), v.end()) != v.end()) throw DomainError(std::string("duplicate grid ") + name + " value");
  };
  check(g.azim, "azim", [](double a) { return a >= 0.0 && a < 360.0; });
  check(g.elev, "elev", [](double e) { return e >= 0.0 && e <= 90.0; });
  check(g.dist, "dist", [](double d) { return d > 0.0; });
}

inline std::vector<double> arithmetic(double first, double step, int count) {
  std::vector<double> v;
  for (int i = 0; i < count; ++i) v.push_back(first + step * i);
  return v;
}

// Full-angle grid: azim every 20 degrees (360 is the same view as 0), elev
// every 6 degrees from 0 to 90, dist every meter from 1 to 8.
inline EvalGrid default_grid() { return {arithmetic(0, 20, 18), arithmetic(0, 6, 16), arithmetic(1, 1, 8)}; }

// 6 x 6 x 3 subset of the default grid used for quick runs: every third
// azimuth, every third elevation, and the distances at which the whole car
// stays in frame.
inline EvalGrid reduced_grid() { return {arithmetic(0, 60, 6), arithmetic(0, 18, 6), {4, 6, 8}}; }

inline nlohmann::json to_json(const EvalGrid& g) { return {{"azim", g.azim}, {"elev", g.elev}, {"dist", g.dist}}; }

inline EvalGrid grid_from_json(const nlohmann::json& j) {
  EvalGrid g;
  try {
    g = {j.at("azim").get<std::vector<double>>(), j.at("elev").get<std::vector<double>>(),
         j.at("dist").get<std::vector<double>>()};
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("bad grid file: ") + e.what());
  }
  validate(g);
  return g;
}

// "default", "reduced" or a JSON file path.
inline EvalGrid resolve_grid(const std::string& name) {
  if (name == "default") return default_grid();
  if (name == "reduced") return reduced_grid();
  return grid_from_json(json_from_file(name));
}

}  // namespace shadowforge
