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

// Printable sticker from a pattern raster: closed contours of
// {alpha >= threshold} as an SVG in millimeters, plus a binary raster.
//
// Marching squares runs on texel centers (texel i sits at i + 0.5) with a
// ring of zero samples around the raster, so every contour closes. Crossings
// are linearly interpolated along cell edges; saddles are resolved by the
// mean of the four corners. Polygons are oriented clockwise in y-down
// coordinates around filled area and counter-clockwise around holes.

#include <cmath>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "shadowforge/core/image_io.hpp"
#include "shadowforge/core/vec.hpp"
#include "shadowforge/shadow/shadow.hpp"

namespace shadowforge {

using Polygon = std::vector<Vec2>;

// Shoelace area; positive for clockwise loops in y-down coordinates.
inline double signed_area(const Polygon& p) {
  double a = 0.0;
  for (size_t i = 0; i < p.size(); ++i) a += cross(p[i], p[(i + 1) % p.size()]);
  return 0.5 * a;
}

namespace detail {

// Edge ids: horizontal edge from sample (a, b) to (a+1, b) and vertical edge
// from (a, b) to (a, b+1) on the padded sample grid.
inline std::int64_t edge_key(int a, int b, bool vertical, int stride) {
  return (static_cast<std::int64_t>(b) * stride + a) * 2 + (vertical ? 1 : 0);
}

inline bool axis_aligned(const Vec2& d, bool horizontal) { return horizontal ? d.y == 0.0 && d.x != 0.0 : d.x == 0.0 && d.y != 0.0; }

// Drops vertices lying on the line through their neighbors.
inline Polygon drop_collinear(Polygon p) {
  bool changed = true;
  while (changed && p.size() > 3) {
    changed = false;
    for (size_t i = 0; i < p.size() && p.size() > 3; ++i) {
      const Vec2& prev = p[(i + p.size() - 1) % p.size()];
      const Vec2& next = p[(i + 1) % p.size()];
      const Vec2 u = p[i] - prev, v = next - p[i];
      if (std::abs(cross(u, v)) <= 1e-12 * (norm(u) * norm(v) + 1e-300) && dot(u, v) >= 0.0) {
        p.erase(p.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        --i;
      }
    }
  }
  return p;
}

// Marching squares cuts every square corner with a chord inside the corner
// cell. A chord of at most one texel per axis joining a horizontal and a
// vertical edge is replaced by the corner where those edges meet.
inline Polygon recover_right_angles(Polygon p) {
  bool changed = true;
  while (changed && p.size() > 4) {
    changed = false;
    const size_t n = p.size();
    for (size_t i = 0; i < n; ++i) {
      const Vec2& a0 = p[(i + n - 1) % n];
      const Vec2& a = p[i];
      const Vec2& b = p[(i + 1) % n];
      const Vec2& b1 = p[(i + 2) % n];
      const Vec2 chord = b - a;
      if (chord.x == 0.0 || chord.y == 0.0 || std::abs(chord.x) > 1.0 || std::abs(chord.y) > 1.0) continue;
      const Vec2 in = a - a0, out = b1 - b;
      Vec2 corner;
      if (axis_aligned(in, true) && axis_aligned(out, false))
        corner = {b.x, a.y};
      else if (axis_aligned(in, false) && axis_aligned(out, true))
        corner = {a.x, b.y};
      else
        continue;
      p[i] = corner;
      p.erase(p.begin() + static_cast<std::ptrdiff_t>((i + 1) % n));
      changed = true;
      break;
    }
  }
  return p;
}

}  // namespace detail

// Contours in texel units (x right, y down, origin at the raster's top-left
// corner).
inline std::vector<Polygon> trace_contours(const Image& alpha, double threshold) {
  const int W = alpha.width, H = alpha.height;
  const int SW = W + 2, SH = H + 2;  // padded samples; sample (a, b) sits at (a - 0.5, b - 0.5)
  const auto value = [&](int a, int b) {
    return a < 1 || b < 1 || a > W || b > H ? 0.0 : alpha.at(a - 1, b - 1);
  };
  const auto inside = [&](int a, int b) { return value(a, b) >= threshold; };
  const auto crossing = [&](int a, int b, bool vertical) {
    const int a2 = vertical ? a : a + 1, b2 = vertical ? b + 1 : b;
    const double v0 = value(a, b), v1 = value(a2, b2);
    const double t = (threshold - v0) / (v1 - v0);
    return Vec2{a - 0.5 + (vertical ? 0.0 : t), b - 0.5 + (vertical ? t : 0.0)};
  };

  std::map<std::int64_t, std::int64_t> next;  // oriented segments, start edge -> end edge
  std::map<std::int64_t, Vec2> point;
  for (int b = 0; b + 1 < SH; ++b)
    for (int a = 0; a + 1 < SW; ++a) {
      // Clockwise walk: top, right, bottom, left edge.
      const int ca[4] = {a, a + 1, a + 1, a}, cb[4] = {b, b, b + 1, b + 1};
      bool in[4];
      for (int k = 0; k < 4; ++k) in[k] = inside(ca[k], cb[k]);
      const std::int64_t keys[4] = {detail::edge_key(a, b, false, SW), detail::edge_key(a + 1, b, true, SW),
                                    detail::edge_key(a, b + 1, false, SW), detail::edge_key(a, b, true, SW)};
      const bool vert[4] = {false, true, false, true};
      const int ea[4] = {a, a + 1, a, a}, eb[4] = {b, b, b + 1, b};
      std::vector<int> entries, exits;  // edge indices in walk order
      for (int k = 0; k < 4; ++k) {
        const bool from = in[k], to = in[(k + 1) % 4];
        if (from == to) continue;
        (to ? entries : exits).push_back(k);
        if (!point.count(keys[k])) point[keys[k]] = crossing(ea[k], eb[k], vert[k]);
      }
      if (entries.empty()) continue;
      // Each inside arc runs from an entry to the following exit; the
      // contour closes it from that exit back to an entry.
      if (entries.size() == 1) {
        next[keys[exits[0]]] = keys[entries[0]];
        continue;
      }
      const double mean = 0.25 * (value(ca[0], cb[0]) + value(ca[1], cb[1]) + value(ca[2], cb[2]) + value(ca[3], cb[3]));
      const auto following = [&](int x, bool same_arc) {
        // Entry that opens the arc ending at exit x (same_arc) or the next arc.
        int best = -1;
        for (int step = 1; step <= 4 && best < 0; ++step) {
          const int k = ((x + (same_arc ? -step : step)) % 4 + 4) % 4;
          if (std::find(entries.begin(), entries.end(), k) != entries.end()) best = k;
        }
        return best;
      };
      const bool joined = mean >= threshold;
      for (int x : exits) next[keys[x]] = keys[following(x, !joined)];
    }

  std::vector<Polygon> loops;
  while (!next.empty()) {
    const std::int64_t start = next.begin()->first;
    Polygon loop;
    std::int64_t k = start;
    do {
      loop.push_back(point.at(k));
      const auto it = next.find(k);
      if (it == next.end()) throw std::logic_error("marching squares: open contour");
      k = it->second;
      next.erase(it);
    } while (k != start);
    loop = detail::drop_collinear(detail::recover_right_angles(detail::drop_collinear(std::move(loop))));
    if (loop.size() >= 3) loops.push_back(std::move(loop));
  }
  return loops;
}

struct Sticker {
  std::vector<Polygon> polygons;  // millimeters
  double mm_per_texel = 1.0;
  double width_mm = 0.0, height_mm = 0.0;
  Image raster;  // 0 (ink) where alpha >= threshold, 1 elsewhere

  double area_mm2() const {
    double a = 0.0;
    for (const auto& p : polygons) a += signed_area(p);
    return a;
  }
};

inline Sticker export_sticker(const PatternRaster& pattern, double threshold, double mm_per_texel) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw DomainError("sticker threshold must lie in (0, 1)");
  if (!(mm_per_texel > 0.0) || !std::isfinite(mm_per_texel)) throw DomainError("mm per texel must be positive");
  const Image& alpha = pattern.alpha;
  if (alpha.empty()) throw DomainError("sticker: empty raster");
  Sticker s;
  s.mm_per_texel = mm_per_texel;
  s.width_mm = alpha.width * mm_per_texel;
  s.height_mm = alpha.height * mm_per_texel;
  s.raster = Image(alpha.width, alpha.height, 1.0);
  bool any = false;
  for (size_t i = 0; i < alpha.size(); ++i)
    if (alpha.data[i] >= threshold) {
      s.raster.data[i] = 0.0;
      any = true;
    }
  if (!any) throw DomainError("sticker: no texel reaches the threshold, region is empty");
  for (auto& loop : trace_contours(alpha, threshold)) {
    for (auto& v : loop) v = mm_per_texel * v;
    s.polygons.push_back(std::move(loop));
  }
  return s;
}

inline std::string sticker_svg(const Sticker& s) {
  std::ostringstream os;
  os.precision(10);
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << s.width_mm << "mm\" height=\"" << s.height_mm
     << "mm\" viewBox=\"0 0 " << s.width_mm << " " << s.height_mm << "\">\n"
     << "  <path fill=\"black\" fill-rule=\"evenodd\" d=\"";
  for (size_t i = 0; i < s.polygons.size(); ++i) {
    const auto& p = s.polygons[i];
    if (i) os << " ";
    for (size_t k = 0; k < p.size(); ++k) os << (k ? " L " : "M ") << p[k].x << " " << p[k].y;
    os << " Z";
  }
  os << "\"/>\n</svg>\n";
  return os.str();
}

inline void write_sticker(const Sticker& s, const std::filesystem::path& dir) {
  write_file_bytes(dir / "sticker.svg", sticker_svg(s));
  write_image(dir / "sticker.png", s.raster);
}

}  // namespace shadowforge
