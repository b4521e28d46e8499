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

// Small procedural scene for tests and gradient checks: a textured box with
// car-like proportions and an atlas of six 32 x 32 panels.

#include <cmath>

#include "shadowforge/scene/model.hpp"

namespace shadowforge {

struct BoxModelOptions {
  Vec3 half_extent{0.8, 0.5, 1.5};  // box centered at (0, half_extent.y, 0)
  int image_size = 64;
  double background = 0.35;
};

inline CarModel make_box_model(const BoxModelOptions& opt = {}) {
  constexpr int kCell = 32, kCols = 3, kRows = 2;
  const int tw = kCell * kCols, th = kCell * kRows;
  CarModel m;
  m.texture = Image(tw, th);
  // Panel c: per-panel base level, a horizontal ramp and a few stripes.
  for (int y = 0; y < th; ++y)
    for (int x = 0; x < tw; ++x) {
      const int c = (y / kCell) * kCols + x / kCell;
      const double u = (x % kCell + 0.5) / kCell, v = (y % kCell + 0.5) / kCell;
      const double stripe = (static_cast<int>(std::floor(v * (3 + c))) % 2) ? 0.08 : 0.0;
      m.texture.at(x, y) = 0.45 + 0.05 * c + 0.15 * u - stripe;
    }

  const double hx = opt.half_extent.x, hy = opt.half_extent.y, hz = opt.half_extent.z;
  const double x0 = -hx, x1 = hx, y0 = 0.0, y1 = 2 * hy, z0 = -hz, z1 = hz;
  auto quad = [&](const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, int cell) {
    const int base = static_cast<int>(m.mesh.vertices.size());
    const int tbase = static_cast<int>(m.mesh.uvs.size());
    for (const Vec3& p : {a, b, c, d}) m.mesh.vertices.push_back(p);
    const double px = (cell % kCols) * kCell, py = (cell / kCols) * kCell;
    const double u0 = (px + 0.5) / tw, u1 = (px + kCell - 0.5) / tw;
    const double v0 = 1.0 - (py + kCell - 0.5) / th, v1 = 1.0 - (py + 0.5) / th;
    for (const Vec2& t : {Vec2{u0, v0}, Vec2{u1, v0}, Vec2{u1, v1}, Vec2{u0, v1}}) m.mesh.uvs.push_back(t);
    m.mesh.faces.push_back({base, base + 1, base + 2});
    m.mesh.faces.push_back({base, base + 2, base + 3});
    m.mesh.uv_faces.push_back({tbase, tbase + 1, tbase + 2});
    m.mesh.uv_faces.push_back({tbase, tbase + 2, tbase + 3});
  };
  quad({x1, y0, z1}, {x1, y0, z0}, {x1, y1, z0}, {x1, y1, z1}, 0);  // +x
  quad({x0, y0, z0}, {x0, y0, z1}, {x0, y1, z1}, {x0, y1, z0}, 1);  // -x
  quad({x0, y0, z1}, {x1, y0, z1}, {x1, y1, z1}, {x0, y1, z1}, 2);  // +z
  quad({x1, y0, z0}, {x0, y0, z0}, {x0, y1, z0}, {x1, y1, z0}, 3);  // -z
  quad({x0, y1, z1}, {x1, y1, z1}, {x1, y1, z0}, {x0, y1, z0}, 4);  // +y
  quad({x0, y0, z0}, {x1, y0, z0}, {x1, y0, z1}, {x0, y0, z1}, 5);  // -y

  m.regions = {{"side", {0, 0, kCell, kCell}}, {"other_side", {kCell, 0, 2.0 * kCell, kCell}},
               {"top", {kCell, kCell, 2.0 * kCell, 2.0 * kCell}}};
  m.texels_per_meter = kCell / (2 * hz);
  m.calibration_view = {5.0, 20.0, 60.0, 60.0, opt.image_size, opt.image_size};
  m.background.level = opt.background;
  return m;
}

}  // namespace shadowforge
