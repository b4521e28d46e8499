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

// Software renderer for a fixed, UV-mapped mesh.
//
// Rasterization (near-plane clipping, back-face culling, z-buffer,
// perspective-correct UV interpolation) depends only on geometry and camera,
// so it is done once into a RenderMap: for every covered pixel, the four
// bilinear texel taps and their weights. Shading a texture is then a sparse
// linear map, and its adjoint scatters image cotangents back onto texels.

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "shadowforge/core/bbox.hpp"
#include "shadowforge/core/image.hpp"
#include "shadowforge/geometry/mesh.hpp"
#include "shadowforge/scene/camera.hpp"

namespace shadowforge {

struct RenderMap {
  int width = 0, height = 0;
  int texture_width = 0, texture_height = 0;
  std::vector<std::uint8_t> mask;
  std::vector<std::array<std::int32_t, 4>> taps;  // texel indices, valid where mask
  std::vector<std::array<double, 4>> weights;
};

struct RenderedImage {
  Image gray;
  std::vector<std::uint8_t> mask;  // car pixels
};

constexpr double kNearPlane = 0.05;

namespace detail {

struct ClipVertex {
  Vec3 pc;  // camera space
  Vec2 uv;
};

// Sutherland-Hodgman against z >= near.
inline int clip_near(const ClipVertex in[3], ClipVertex out[4]) {
  int n = 0;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& a = in[i];
    const ClipVertex& b = in[(i + 1) % 3];
    const bool ain = a.pc.z >= kNearPlane, bin = b.pc.z >= kNearPlane;
    if (ain) out[n++] = a;
    if (ain != bin) {
      const double t = (kNearPlane - a.pc.z) / (b.pc.z - a.pc.z);
      out[n++] = {a.pc + t * (b.pc - a.pc), a.uv + t * (b.uv - a.uv)};
    }
  }
  return n;
}

}  // namespace detail

inline RenderMap rasterize(const TriMesh& mesh, const Camera& cam, int texture_width, int texture_height) {
  if (!mesh.has_uvs()) throw DomainError("render: mesh has no texture coordinates");
  if (texture_width < 1 || texture_height < 1) throw DomainError("render: empty texture");
  const int W = cam.width, H = cam.height;
  RenderMap map;
  map.width = W;
  map.height = H;
  map.texture_width = texture_width;
  map.texture_height = texture_height;
  map.mask.assign(static_cast<size_t>(W) * H, 0);
  map.taps.assign(map.mask.size(), {0, 0, 0, 0});
  map.weights.assign(map.mask.size(), {0, 0, 0, 0});
  std::vector<double> inv_depth(map.mask.size(), 0.0);
  std::vector<Vec2> uv_at(map.mask.size());

  for (size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    const Face& ft = mesh.uv_faces[fi];
    const Vec3& w0 = mesh.vertices[f[0]];
    const Vec3 n = cross(mesh.vertices[f[1]] - w0, mesh.vertices[f[2]] - w0);
    if (dot(n, w0 - cam.eye) >= 0.0) continue;  // back-facing

    detail::ClipVertex tri[3], poly[4];
    for (int k = 0; k < 3; ++k) tri[k] = {cam.to_camera(mesh.vertices[f[k]]), mesh.uvs[ft[k]]};
    const int m = detail::clip_near(tri, poly);
    for (int t = 1; t + 1 < m; ++t) {
      const detail::ClipVertex* v[3] = {&poly[0], &poly[t], &poly[t + 1]};
      Vec2 s[3];
      double iz[3];
      for (int k = 0; k < 3; ++k) {
        s[k] = cam.to_pixel(v[k]->pc);
        iz[k] = 1.0 / v[k]->pc.z;
      }
      const double area = cross(s[1] - s[0], s[2] - s[0]);
      if (area == 0.0) continue;
      const int x0 = std::max(0, static_cast<int>(std::floor(std::min({s[0].x, s[1].x, s[2].x}))));
      const int x1 = std::min(W - 1, static_cast<int>(std::ceil(std::max({s[0].x, s[1].x, s[2].x}))));
      const int y0 = std::max(0, static_cast<int>(std::floor(std::min({s[0].y, s[1].y, s[2].y}))));
      const int y1 = std::min(H - 1, static_cast<int>(std::ceil(std::max({s[0].y, s[1].y, s[2].y}))));
      for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
          const Vec2 p{x + 0.5, y + 0.5};
          const double b0 = cross(s[2] - s[1], p - s[1]) / area;
          const double b1 = cross(s[0] - s[2], p - s[2]) / area;
          const double b2 = 1.0 - b0 - b1;
          if (b0 < 0 || b1 < 0 || b2 < 0) continue;
          const double izp = b0 * iz[0] + b1 * iz[1] + b2 * iz[2];
          const size_t idx = static_cast<size_t>(y) * W + x;
          if (izp <= inv_depth[idx]) continue;
          inv_depth[idx] = izp;
          map.mask[idx] = 1;
          const double c0 = b0 * iz[0] / izp, c1 = b1 * iz[1] / izp, c2 = b2 * iz[2] / izp;
          uv_at[idx] = c0 * v[0]->uv + c1 * v[1]->uv + c2 * v[2]->uv;
        }
    }
  }

  // Bilinear taps, clamp-to-edge. OBJ v = 0 is the bottom texture row.
  for (size_t idx = 0; idx < map.mask.size(); ++idx) {
    if (!map.mask[idx]) continue;
    const double tx = std::clamp(uv_at[idx].x * texture_width - 0.5, 0.0, texture_width - 1.0);
    const double ty = std::clamp((1.0 - uv_at[idx].y) * texture_height - 0.5, 0.0, texture_height - 1.0);
    const int ix = std::min(static_cast<int>(tx), texture_width - 1);
    const int iy = std::min(static_cast<int>(ty), texture_height - 1);
    const int ix1 = std::min(ix + 1, texture_width - 1), iy1 = std::min(iy + 1, texture_height - 1);
    const double fx = tx - ix, fy = ty - iy;
    map.taps[idx] = {iy * texture_width + ix, iy * texture_width + ix1, iy1 * texture_width + ix,
                     iy1 * texture_width + ix1};
    map.weights[idx] = {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy};
  }
  return map;
}

// Constant level or an image resampled to the viewport.
struct Background {
  double level = 0.35;
  std::optional<Image> image;

  Image resolve(int w, int h) const {
    if (image) return resize_bilinear(*image, w, h);
    return Image(w, h, level);
  }
};

inline RenderedImage shade(const RenderMap& map, const Image& texture, const Image& background) {
  if (texture.width != map.texture_width || texture.height != map.texture_height)
    throw DomainError("render: texture size differs from the one the render map was built for");
  RenderedImage out{background, map.mask};
  for (size_t idx = 0; idx < map.mask.size(); ++idx) {
    if (!map.mask[idx]) continue;
    const auto& t = map.taps[idx];
    const auto& w = map.weights[idx];
    out.gray.data[idx] = w[0] * texture.data[t[0]] + w[1] * texture.data[t[1]] + w[2] * texture.data[t[2]] +
                         w[3] * texture.data[t[3]];
  }
  return out;
}

// Cotangent on the rendered image -> cotangent on texels.
inline Image shade_vjp(const RenderMap& map, const Image& grad_image) {
  Image g(map.texture_width, map.texture_height);
  for (size_t idx = 0; idx < map.mask.size(); ++idx) {
    if (!map.mask[idx]) continue;
    const double gi = grad_image.data[idx];
    if (gi == 0.0) continue;
    const auto& t = map.taps[idx];
    const auto& w = map.weights[idx];
    for (int k = 0; k < 4; ++k) g.data[t[k]] += w[k] * gi;
  }
  return g;
}

inline RenderedImage render(const TriMesh& car, const Image& texture, const CameraParams& params,
                            const Background& background) {
  if (texture.empty()) throw DomainError("render: empty texture");
  const Camera cam = camera_matrix(params, centroid(car.vertices));
  const RenderMap map = rasterize(car, cam, texture.width, texture.height);
  return shade(map, texture, background.resolve(params.width, params.height));
}

// Tight box around mask pixels as (min col, min row, max col, max row);
// nullopt when nothing is covered.
inline std::optional<BBox> silhouette_bbox(const std::vector<std::uint8_t>& mask, int width, int height) {
  int x1 = width, y1 = height, x2 = -1, y2 = -1;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if (mask[static_cast<size_t>(y) * width + x]) {
        x1 = std::min(x1, x);
        x2 = std::max(x2, x);
        y1 = std::min(y1, y);
        y2 = std::max(y2, y);
      }
  if (x2 < 0) return std::nullopt;
  return BBox{static_cast<double>(x1), static_cast<double>(y1), static_cast<double>(x2), static_cast<double>(y2)};
}

inline std::optional<BBox> silhouette_bbox(const RenderedImage& img) {
  return silhouette_bbox(img.mask, img.gray.width, img.gray.height);
}

}  // namespace shadowforge
