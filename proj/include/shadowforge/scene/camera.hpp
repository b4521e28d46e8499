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

#include <cmath>
#include <numbers>

#include "shadowforge/core/error.hpp"
#include "shadowforge/core/vec.hpp"

namespace shadowforge {

// Viewpoint on a sphere around the target. World up is +y; azim = 0, elev = 0
// puts the eye on the +z axis, azim = 90 on +x.
struct CameraParams {
  double dist = 6.0;   // meters
  double elev = 15.0;  // degrees, [0, 90]
  double azim = 0.0;   // degrees, [0, 360)
  double fov = 60.0;   // vertical, degrees, (10, 120)
  int width = 256;
  int height = 256;

  bool operator==(const CameraParams&) const = default;
};

inline void validate(const CameraParams& c) {
  if (!(c.dist > 0.0)) throw DomainError("camera dist must be positive");
  if (!(c.elev >= 0.0 && c.elev <= 90.0)) throw DomainError("camera elev must be in [0, 90]");
  if (!(c.azim >= 0.0 && c.azim < 360.0)) throw DomainError("camera azim must be in [0, 360)");
  if (!(c.fov > 10.0 && c.fov < 120.0)) throw DomainError("camera fov must be in (10, 120)");
  if (c.width < 1 || c.height < 1) throw DomainError("camera image size must be positive");
}

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

// Look-at pinhole camera. Camera coordinates: x along `right`, y along `up`,
// z (depth, positive in front) along `forward`. Pixel (i, j) covers
// [i, i+1) x [j, j+1); rows grow downward.
struct Camera {
  Vec3 eye, target;
  Vec3 right, up, forward;
  double focal = 1.0;  // pixels
  int width = 0, height = 0;

  Vec3 to_camera(const Vec3& p) const {
    const Vec3 d = p - eye;
    return {dot(d, right), dot(d, up), dot(d, forward)};
  }
  Vec2 to_pixel(const Vec3& pc) const {
    return {0.5 * width + focal * pc.x / pc.z, 0.5 * height - focal * pc.y / pc.z};
  }
};

// At elev = 90 the look-at is degenerate; the up vector becomes the limit
// approached from lower elevations at the same azimuth, (-sin a, 0, -cos a).
inline Camera camera_matrix(const CameraParams& p, const Vec3& target) {
  validate(p);
  const double e = deg2rad(p.elev), a = deg2rad(p.azim);
  Camera c;
  c.target = target;
  c.eye = target + p.dist * Vec3{std::cos(e) * std::sin(a), std::sin(e), std::cos(e) * std::cos(a)};
  if (p.elev == 90.0) c.eye = target + Vec3{0.0, p.dist, 0.0};
  c.forward = normalized(target - c.eye);
  Vec3 world_up{0.0, 1.0, 0.0};
  if (std::abs(dot(c.forward, world_up)) > 1.0 - 1e-12) world_up = {-std::sin(a), 0.0, -std::cos(a)};
  c.right = normalized(cross(c.forward, world_up));
  c.up = cross(c.right, c.forward);
  c.focal = 0.5 * p.height / std::tan(0.5 * deg2rad(p.fov));
  c.width = p.width;
  c.height = p.height;
  return c;
}

}  // namespace shadowforge
