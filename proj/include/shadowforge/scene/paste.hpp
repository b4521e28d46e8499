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

// Pasting shadow patterns into the texture map.
//
// Texel (x, y) covers [x, x+1) x [y, y+1) in continuous texel coordinates.
// A pattern of resolution R pasted at center P covers texel centers within
// R/2 of P; its alpha is resampled bilinearly at (texel center - P + R/2),
// zero outside the raster. Patterns are composited in index order,
//   T <- (1 - alpha) T + alpha * gray,
// each clipped to its placement region, and the result is clamped to [0,1].

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "shadowforge/core/image.hpp"
#include "shadowforge/shadow/shadow.hpp"

namespace shadowforge {

using TextureMap = Image;

inline void validate_texture(const TextureMap& t) {
  if (t.empty()) throw DomainError("texture is empty");
  for (double v : t.data)
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("texture values must lie in [0,1]");
}

// Rectangle in continuous texel coordinates.
struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool contains(const Vec2& p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  Vec2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  Vec2 clamp(const Vec2& p) const { return {std::clamp(p.x, x0, x1), std::clamp(p.y, y0, y1)}; }
  bool operator==(const Rect&) const = default;
};

struct PastePlacement {
  Vec2 center;
  Rect region;
  std::string region_name;
};

namespace detail {

// Bilinear lookup with zero padding; pixel (i, j) centered at (i+0.5, j+0.5).
struct BilinearTap {
  int x0, y0;
  double fx, fy;
};

inline BilinearTap bilinear_tap(double px, double py) {
  const double sx = px - 0.5, sy = py - 0.5;
  const double fx0 = std::floor(sx), fy0 = std::floor(sy);
  return {static_cast<int>(fx0), static_cast<int>(fy0), sx - fx0, sy - fy0};
}

inline double pixel_or_zero(const Image& img, int x, int y) { return img.contains(x, y) ? img.at(x, y) : 0.0; }

inline double sample_zero(const Image& img, const BilinearTap& t) {
  return (1 - t.fx) * (1 - t.fy) * pixel_or_zero(img, t.x0, t.y0) + t.fx * (1 - t.fy) * pixel_or_zero(img, t.x0 + 1, t.y0) +
         (1 - t.fx) * t.fy * pixel_or_zero(img, t.x0, t.y0 + 1) + t.fx * t.fy * pixel_or_zero(img, t.x0 + 1, t.y0 + 1);
}

// Texel index range touched by a pattern, clipped to region and texture.
struct Footprint {
  int x0, y0, x1, y1;  // inclusive
  bool clipped_by_region;
};

inline Footprint footprint(const TextureMap& tex, int resolution, const PastePlacement& pl) {
  const double half = 0.5 * resolution;
  // texel centers x + 0.5 in (center - half - 1, center + half + 1)
  int x0 = static_cast<int>(std::floor(pl.center.x - half - 1.0));
  int x1 = static_cast<int>(std::ceil(pl.center.x + half));
  int y0 = static_cast<int>(std::floor(pl.center.y - half - 1.0));
  int y1 = static_cast<int>(std::ceil(pl.center.y + half));
  const int rx0 = static_cast<int>(std::ceil(pl.region.x0 - 0.5));
  const int rx1 = static_cast<int>(std::floor(pl.region.x1 - 0.5));
  const int ry0 = static_cast<int>(std::ceil(pl.region.y0 - 0.5));
  const int ry1 = static_cast<int>(std::floor(pl.region.y1 - 0.5));
  Footprint f{std::max({x0, rx0, 0}), std::max({y0, ry0, 0}), std::min({x1, rx1, tex.width - 1}),
              std::min({y1, ry1, tex.height - 1}), false};
  f.clipped_by_region = x0 < rx0 || y0 < ry0 || x1 > rx1 || y1 > ry1;
  return f;
}

}  // namespace detail

struct PasteResult {
  TextureMap texture;
  std::vector<TextureMap> layers;  // texture before pattern k was composited
  std::vector<std::string> warnings;
};

inline PasteResult paste_patterns(const TextureMap& origin, const std::vector<PatternRaster>& patterns,
                                  const std::vector<PastePlacement>& placements) {
  if (patterns.size() != placements.size()) throw DomainError("paste: pattern and placement counts differ");
  PasteResult r;
  TextureMap t = origin;
  for (size_t k = 0; k < patterns.size(); ++k) {
    r.layers.push_back(t);
    const auto& pat = patterns[k];
    const auto& pl = placements[k];
    const double half = 0.5 * pat.resolution();
    const auto fp = detail::footprint(t, pat.resolution(), pl);
    bool spilled = false;
    for (int y = fp.y0; y <= fp.y1; ++y)
      for (int x = fp.x0; x <= fp.x1; ++x) {
        const auto tap = detail::bilinear_tap(x + 0.5 - pl.center.x + half, y + 0.5 - pl.center.y + half);
        const double a = detail::sample_zero(pat.alpha, tap);
        if (a == 0.0) continue;
        double& v = t.at(x, y);
        v = (1.0 - a) * v + a * pat.gray;
      }
    if (fp.clipped_by_region) {
      // Only warn when coverage actually lies outside the region.
      const Rect& rg = pl.region;
      for (int j = 0; j < pat.resolution() && !spilled; ++j)
        for (int i = 0; i < pat.resolution() && !spilled; ++i) {
          if (pat.alpha.at(i, j) < 1e-3) continue;
          const Vec2 p{pl.center.x - half + i + 0.5, pl.center.y - half + j + 0.5};
          if (!rg.contains(p)) spilled = true;
        }
    }
    if (spilled)
      r.warnings.push_back("pattern " + std::to_string(k) + " exceeds region '" + pl.region_name + "'; clipped");
  }
  for (double& v : t.data) v = std::clamp(v, 0.0, 1.0);
  r.texture = std::move(t);
  return r;
}

struct PasteGradient {
  std::vector<Image> alpha;    // per pattern, pattern resolution
  std::vector<double> gray;    // per pattern
  std::vector<Vec2> center;    // per pattern
  TextureMap origin;           // cotangent on the original texture
};

inline PasteGradient paste_patterns_vjp(const std::vector<PatternRaster>& patterns,
                                        const std::vector<PastePlacement>& placements, const PasteResult& fwd,
                                        const Image& grad_texture) {
  const size_t n = patterns.size();
  PasteGradient g;
  g.alpha.resize(n);
  g.gray.assign(n, 0.0);
  g.center.assign(n, Vec2{});

  // Clamp at the output.
  Image upstream = grad_texture;
  {
    // Recompose the unclamped final value from the last layer.
    const TextureMap& last = n ? fwd.layers.back() : fwd.texture;
    Image unclamped = last;
    if (n) {
      const auto& pat = patterns[n - 1];
      const auto& pl = placements[n - 1];
      const double half = 0.5 * pat.resolution();
      const auto fp = detail::footprint(last, pat.resolution(), pl);
      for (int y = fp.y0; y <= fp.y1; ++y)
        for (int x = fp.x0; x <= fp.x1; ++x) {
          const auto tap = detail::bilinear_tap(x + 0.5 - pl.center.x + half, y + 0.5 - pl.center.y + half);
          const double a = detail::sample_zero(pat.alpha, tap);
          unclamped.at(x, y) = (1.0 - a) * last.at(x, y) + a * pat.gray;
        }
    }
    for (size_t i = 0; i < upstream.size(); ++i)
      if (unclamped.data[i] < 0.0 || unclamped.data[i] > 1.0) upstream.data[i] = 0.0;
  }

  for (size_t kk = n; kk-- > 0;) {
    const auto& pat = patterns[kk];
    const auto& pl = placements[kk];
    const TextureMap& prev = fwd.layers[kk];
    const int res = pat.resolution();
    const double half = 0.5 * res;
    Image& ga = g.alpha[kk];
    ga = Image(res, res);
    const auto fp = detail::footprint(prev, res, pl);
    for (int y = fp.y0; y <= fp.y1; ++y)
      for (int x = fp.x0; x <= fp.x1; ++x) {
        const double G = upstream.at(x, y);
        const auto tap = detail::bilinear_tap(x + 0.5 - pl.center.x + half, y + 0.5 - pl.center.y + half);
        const double a = detail::sample_zero(pat.alpha, tap);
        upstream.at(x, y) = G * (1.0 - a);
        if (G == 0.0) continue;
        g.gray[kk] += G * a;
        const double gA = G * (pat.gray - prev.at(x, y));
        const double v00 = detail::pixel_or_zero(pat.alpha, tap.x0, tap.y0);
        const double v10 = detail::pixel_or_zero(pat.alpha, tap.x0 + 1, tap.y0);
        const double v01 = detail::pixel_or_zero(pat.alpha, tap.x0, tap.y0 + 1);
        const double v11 = detail::pixel_or_zero(pat.alpha, tap.x0 + 1, tap.y0 + 1);
        auto scatter = [&](int i, int j, double w) {
          if (ga.contains(i, j)) ga.at(i, j) += gA * w;
        };
        scatter(tap.x0, tap.y0, (1 - tap.fx) * (1 - tap.fy));
        scatter(tap.x0 + 1, tap.y0, tap.fx * (1 - tap.fy));
        scatter(tap.x0, tap.y0 + 1, (1 - tap.fx) * tap.fy);
        scatter(tap.x0 + 1, tap.y0 + 1, tap.fx * tap.fy);
        // sample coordinate = texel center - P + half, so d/dP = -d/dcoord
        const double dax = (1 - tap.fy) * (v10 - v00) + tap.fy * (v11 - v01);
        const double day = (1 - tap.fx) * (v01 - v00) + tap.fx * (v11 - v10);
        g.center[kk] -= Vec2{gA * dax, gA * day};
      }
  }
  g.origin = std::move(upstream);
  return g;
}

}  // namespace shadowforge
