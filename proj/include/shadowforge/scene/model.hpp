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

// Car model bundle: UV-mapped mesh, infrared texture, paste regions and the
// detector calibration view, bound together by a JSON file whose relative
// paths resolve against the file's directory.

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "shadowforge/core/image_io.hpp"
#include "shadowforge/geometry/obj.hpp"
#include "shadowforge/scene/camera.hpp"
#include "shadowforge/scene/paste.hpp"
#include "shadowforge/scene/render.hpp"

namespace shadowforge {

struct CarModel {
  TriMesh mesh;
  TextureMap texture;
  std::map<std::string, Rect> regions;  // texel rectangles
  double texels_per_meter = 50.0;
  CameraParams calibration_view;
  Background background;
  std::filesystem::path mesh_path, texture_path;
};

inline const Rect& region(const CarModel& m, const std::string& name) {
  auto it = m.regions.find(name);
  if (it == m.regions.end()) throw DomainError("model has no region named '" + name + "'");
  return it->second;
}

inline nlohmann::json camera_to_json(const CameraParams& c) {
  return {{"azim", c.azim}, {"elev", c.elev}, {"dist", c.dist}, {"fov", c.fov}, {"width", c.width}, {"height", c.height}};
}

inline CameraParams camera_from_json(const nlohmann::json& j, CameraParams c = {}) {
  c.azim = j.value("azim", c.azim);
  c.elev = j.value("elev", c.elev);
  c.dist = j.value("dist", c.dist);
  c.fov = j.value("fov", c.fov);
  c.width = j.value("width", c.width);
  c.height = j.value("height", c.height);
  validate(c);
  return c;
}

inline nlohmann::json json_from_file(const std::filesystem::path& path) {
  const std::string text = read_file_bytes(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw AssetError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

inline CarModel load_model(const std::filesystem::path& path) {
  const auto j = json_from_file(path);
  const auto base = path.parent_path();
  CarModel m;
  try {
    m.mesh_path = base / j.at("mesh").get<std::string>();
    m.texture_path = base / j.at("texture").get<std::string>();
    m.texels_per_meter = j.value("texels_per_meter", m.texels_per_meter);
    for (const auto& [name, r] : j.at("regions").items())
      m.regions[name] = Rect{r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(), r.at(3).get<double>()};
    if (j.contains("calibration_view")) m.calibration_view = camera_from_json(j["calibration_view"]);
    m.background.level = j.value("background", m.background.level);
  } catch (const nlohmann::json::exception& e) {
    throw AssetError("bad model config " + path.string() + ": " + e.what());
  }
  m.mesh = load_obj(m.mesh_path);
  if (!m.mesh.has_uvs()) throw AssetError("model mesh has no texture coordinates: " + m.mesh_path.string());
  m.texture = read_image(m.texture_path);
  for (const auto& [name, r] : m.regions)
    if (!(r.x0 < r.x1 && r.y0 < r.y1)) throw AssetError("region '" + name + "' is empty");
  return m;
}

}  // namespace shadowforge
