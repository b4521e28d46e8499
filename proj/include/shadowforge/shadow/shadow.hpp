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

// Shadow projection: rotate a closed mesh about the up (y) axis through its
// centroid, drop the depth (z) axis and softly rasterize the silhouette into a
// square coverage raster. The covered region carries one uniform gray level.
//
// Per face f and pixel center p, coverage is c_f = sigmoid(d_f(p) / tau) with
// d_f the exact signed distance from p to the projected triangle (positive
// inside). Faces combine by soft union alpha = 1 - prod_f (1 - c_f), evaluated
// in log space: log(1 - c_f) = -softplus(d_f / tau).

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "shadowforge/core/image.hpp"
#include "shadowforge/geometry/mesh.hpp"

namespace shadowforge {

struct ShadowParams {
  double phi = 0.0;       // rotation about the up axis, radians
  double gray = 0.15;     // sticker gray level in [0,1]
  int resolution = 128;   // raster is resolution x resolution
  double scale = 40.0;    // raster pixels per model unit
  double softness = 1.0;  // tau, pixels
};

inline void validate(const ShadowParams& p) {
  if (!(p.gray >= 0.0 && p.gray <= 1.0)) throw DomainError("shadow gray must be in [0,1]");
  if (p.resolution < 8) throw DomainError("shadow resolution must be >= 8");
  if (!(p.softness > 0.0)) throw DomainError("shadow softness must be positive");
  if (!(p.scale > 0.0)) throw DomainError("shadow scale must be positive");
}

struct PatternRaster {
  Image alpha;  // coverage in [0,1]
  double gray = 0.15;

  int resolution() const { return alpha.width; }
};

// Faces farther than this many tau outside contribute exactly zero coverage;
// sigmoid(-16) ~ 1.1e-7. Each face's term is shifted by its value at the
// cutoff so coverage stays continuous there.
constexpr double kSilhouetteCutoff = 16.0;

struct ProjectedMesh {
  std::vector<Vec2> points;  // pixel coordinates, pixel (i, j) centered at (i + 0.5, j + 0.5)
  std::vector<std::string> warnings;
};

// Orthographic projection after rotation by phi about the y axis through the
// vertex centroid. The projected centroid lands on the raster center; image
// rows grow downward (against +y).
inline ProjectedMesh project_vertices(const TriMesh& mesh, double phi, double scale, int resolution) {
  if (mesh.vertices.empty()) throw DomainError("project_vertices on an empty mesh");
  const Vec3 c = centroid(mesh.vertices);
  const double cs = std::cos(phi), sn = std::sin(phi);
  const double half = 0.5 * resolution;
  ProjectedMesh out;
  out.points.reserve(mesh.vertices.size());
  bool clipped = false;
  for (const auto& v : mesh.vertices) {
    const Vec3 p = v - c;
    const double x = cs * p.x + sn * p.z;
    const Vec2 q{half + scale * x, half - scale * p.y};
    if (q.x < -0.2 * resolution || q.y < -0.2 * resolution || q.x > 1.2 * resolution || q.y > 1.2 * resolution)
      clipped = true;
    out.points.push_back(q);
  }
  if (clipped) out.warnings.push_back("shadow projection exceeds raster bounds by more than 20%; pattern clipped");
  return out;
}

// Cotangent on projected points -> cotangents on vertices and phi.
inline void project_vertices_vjp(const TriMesh& mesh, double phi, double scale, const std::vector<Vec2>& grad_points,
                                 std::vector<Vec3>& grad_vertices, double& grad_phi) {
  const Vec3 c = centroid(mesh.vertices);
  const double cs = std::cos(phi), sn = std::sin(phi);
  const size_t n = mesh.vertices.size();
  grad_vertices.assign(n, Vec3{});
  grad_phi = 0.0;
  Vec3 mean_grad;
  for (size_t i = 0; i < n; ++i) {
    const Vec3 p = mesh.vertices[i] - c;
    const Vec2& g = grad_points[i];
    // u = half + scale * (cs*px + sn*pz), v = half - scale * py
    const Vec3 gp{scale * cs * g.x, -scale * g.y, scale * sn * g.x};
    grad_vertices[i] = gp;
    mean_grad += gp;
    grad_phi += g.x * scale * (-sn * p.x + cs * p.z);
  }
  mean_grad /= static_cast<double>(n);
  for (auto& g : grad_vertices) g -= mean_grad;
}

namespace detail {

struct SignedDistance {
  double d;    // positive inside
  int edge;    // closest edge k runs from corner k to corner k+1
  double t;    // closest point parameter along that edge
  Vec2 r;      // p - closest point
  double dist; // |r|
};

inline SignedDistance signed_distance(const Vec2& p, const Vec2 tri[3], double orient) {
  SignedDistance best{0.0, 0, 0.0, {}, std::numeric_limits<double>::infinity()};
  bool inside = orient != 0.0;
  for (int k = 0; k < 3; ++k) {
    const Vec2& a = tri[k];
    const Vec2& b = tri[(k + 1) % 3];
    const Vec2 e = b - a;
    const Vec2 ap = p - a;
    if (orient * cross(e, ap) < 0.0) inside = false;
    const double ee = dot(e, e);
    const double t = ee > 0.0 ? std::clamp(dot(ap, e) / ee, 0.0, 1.0) : 0.0;
    const Vec2 r = ap - t * e;
    const double dist = norm(r);
    if (dist < best.dist) best = {0.0, k, t, r, dist};
  }
  best.d = inside ? best.dist : -best.dist;
  return best;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + e^x), stable for large |x|.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

template <typename Fn>
void for_each_face_pixel(const std::vector<Vec2>& pts, const std::vector<Face>& faces, int resolution, double tau,
                         Fn&& fn) {
  const double margin = kSilhouetteCutoff * tau;
  for (size_t f = 0; f < faces.size(); ++f) {
    const Vec2 tri[3] = {pts[faces[f][0]], pts[faces[f][1]], pts[faces[f][2]]};
    const double orient = cross(tri[1] - tri[0], tri[2] - tri[0]);
    const double sgn = orient > 0.0 ? 1.0 : (orient < 0.0 ? -1.0 : 0.0);
    const double lo_x = std::min({tri[0].x, tri[1].x, tri[2].x}) - margin;
    const double hi_x = std::max({tri[0].x, tri[1].x, tri[2].x}) + margin;
    const double lo_y = std::min({tri[0].y, tri[1].y, tri[2].y}) - margin;
    const double hi_y = std::max({tri[0].y, tri[1].y, tri[2].y}) + margin;
    const int x0 = std::max(0, static_cast<int>(std::ceil(lo_x - 0.5)));
    const int x1 = std::min(resolution - 1, static_cast<int>(std::floor(hi_x - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(lo_y - 0.5)));
    const int y1 = std::min(resolution - 1, static_cast<int>(std::floor(hi_y - 0.5)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const Vec2 p{x + 0.5, y + 0.5};
        const SignedDistance sd = signed_distance(p, tri, sgn);
        if (sd.d < -margin) continue;
        fn(f, x, y, sd);
      }
  }
}

}  // namespace detail

// Soft coverage raster plus the per-pixel log of the uncovered fraction,
// which the backward pass needs.
struct SoftSilhouette {
  Image alpha;
  Image log_uncovered;  // sum_f log(1 - c_f)
};

inline SoftSilhouette soft_silhouette(const std::vector<Vec2>& pts, const std::vector<Face>& faces, int resolution,
                                      double tau) {
  if (!(tau > 0.0)) throw DomainError("silhouette softness must be positive");
  SoftSilhouette out{Image(resolution, resolution), Image(resolution, resolution)};
  detail::for_each_face_pixel(pts, faces, resolution, tau, [&](size_t, int x, int y, const detail::SignedDistance& sd) {
    out.log_uncovered.at(x, y) -= detail::softplus(sd.d / tau) - detail::softplus(-kSilhouetteCutoff);
  });
  for (size_t i = 0; i < out.alpha.size(); ++i) out.alpha.data[i] = -std::expm1(out.log_uncovered.data[i]);
  return out;
}

// Cotangent on alpha -> cotangent on projected points.
inline std::vector<Vec2> soft_silhouette_vjp(const std::vector<Vec2>& pts, const std::vector<Face>& faces, double tau,
                                             const SoftSilhouette& fwd, const Image& grad_alpha) {
  std::vector<Vec2> grad(pts.size());
  const int resolution = fwd.alpha.width;
  detail::for_each_face_pixel(pts, faces, resolution, tau, [&](size_t f, int x, int y, const detail::SignedDistance& sd) {
    const double g = grad_alpha.at(x, y);
    if (g == 0.0 || sd.dist == 0.0) return;
    const double z = sd.d / tau;
    // d alpha / d c_f = prod_{g != f} (1 - c_g) = exp(S + softplus(z)); dc/dz = s(z) s(-z)
    const double others = std::exp(fwd.log_uncovered.at(x, y) + detail::softplus(z));
    const double dalpha_dd = others * detail::sigmoid(z) * detail::sigmoid(-z) / tau;
    // d(dist)/d(closest point) = -r/dist, and d = +-dist.
    const double sign = sd.d >= 0.0 ? 1.0 : -1.0;
    const Vec2 gq = (-g * dalpha_dd * sign / sd.dist) * sd.r;
    const int a = faces[f][sd.edge], b = faces[f][(sd.edge + 1) % 3];
    grad[a] += (1.0 - sd.t) * gq;
    grad[b] += sd.t * gq;
  });
  return grad;
}

struct ShadowResult {
  PatternRaster pattern;
  ProjectedMesh projection;
  SoftSilhouette silhouette;
};

inline ShadowResult shadow_project(const TriMesh& mesh, const ShadowParams& params) {
  validate(params);
  ShadowResult r;
  r.projection = project_vertices(mesh, params.phi, params.scale, params.resolution);
  r.silhouette = soft_silhouette(r.projection.points, mesh.faces, params.resolution, params.softness);
  r.pattern = {r.silhouette.alpha, params.gray};
  return r;
}

struct ShadowGradient {
  std::vector<Vec3> vertices;
  double phi = 0.0;
};

inline ShadowGradient shadow_project_vjp(const TriMesh& mesh, const ShadowParams& params, const ShadowResult& fwd,
                                         const Image& grad_alpha) {
  const auto gp = soft_silhouette_vjp(fwd.projection.points, mesh.faces, params.softness, fwd.silhouette, grad_alpha);
  ShadowGradient g;
  project_vertices_vjp(mesh, params.phi, params.scale, gp, g.vertices, g.phi);
  return g;
}

}  // namespace shadowforge
