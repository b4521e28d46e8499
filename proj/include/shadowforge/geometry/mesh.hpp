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
#include <array>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "shadowforge/core/error.hpp"
#include "shadowforge/core/vec.hpp"

namespace shadowforge {

using Face = std::array<int, 3>;

// Triangle mesh with optional per-corner texture coordinates. Faces wind
// counterclockwise when seen from outside.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<Vec2> uvs;
  std::vector<Face> uv_faces;  // parallel to faces when present

  bool has_uvs() const { return !uv_faces.empty(); }
  bool operator==(const TriMesh&) const = default;
};

constexpr double kDegenerateAreaTolerance = 1e-12;

inline Vec3 face_normal_unnormalized(const TriMesh& m, const Face& f) {
  return cross(m.vertices[f[1]] - m.vertices[f[0]], m.vertices[f[2]] - m.vertices[f[0]]);
}

inline double face_area(const TriMesh& m, const Face& f) { return 0.5 * norm(face_normal_unnormalized(m, f)); }

// Checks index ranges, UV layout and the nondegenerate-area invariant.
inline void validate(const TriMesh& m) {
  const int nv = static_cast<int>(m.vertices.size());
  const int nt = static_cast<int>(m.uvs.size());
  for (size_t i = 0; i < m.faces.size(); ++i)
    for (int c : m.faces[i])
      if (c < 0 || c >= nv) throw DomainError("face " + std::to_string(i) + " references vertex out of range");
  if (!m.uv_faces.empty()) {
    if (m.uv_faces.size() != m.faces.size()) throw DomainError("uv_faces and faces differ in length");
    for (size_t i = 0; i < m.uv_faces.size(); ++i)
      for (int c : m.uv_faces[i])
        if (c < 0 || c >= nt) throw DomainError("face " + std::to_string(i) + " references uv out of range");
  }
  std::string degenerate;
  for (size_t i = 0; i < m.faces.size(); ++i) {
    if (face_area(m, m.faces[i]) <= kDegenerateAreaTolerance) {
      if (!degenerate.empty()) degenerate += ",";
      degenerate += std::to_string(i);
    }
  }
  if (!degenerate.empty()) throw DomainError("degenerate faces: " + degenerate);
}

// Undirected edge with one or two incident faces (f1 == -1 on the boundary).
struct Edge {
  int v0, v1;
  int f0, f1;
};

inline std::vector<Edge> build_edges(const TriMesh& m) {
  std::map<std::pair<int, int>, size_t> lookup;
  std::vector<Edge> edges;
  for (int fi = 0; fi < static_cast<int>(m.faces.size()); ++fi) {
    const Face& f = m.faces[fi];
    for (int k = 0; k < 3; ++k) {
      int a = f[k], b = f[(k + 1) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = lookup.try_emplace({a, b}, edges.size());
      if (inserted) {
        edges.push_back({a, b, fi, -1});
      } else {
        Edge& e = edges[it->second];
        if (e.f1 != -1) throw DomainError("non-manifold edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
        e.f1 = fi;
      }
    }
  }
  return edges;
}

// Sorted, deduplicated one-ring of every vertex.
inline std::vector<std::vector<int>> vertex_neighbors(const TriMesh& m) {
  std::vector<std::vector<int>> nbrs(m.vertices.size());
  for (const Face& f : m.faces)
    for (int k = 0; k < 3; ++k) {
      nbrs[f[k]].push_back(f[(k + 1) % 3]);
      nbrs[f[k]].push_back(f[(k + 2) % 3]);
    }
  for (auto& n : nbrs) {
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
  }
  return nbrs;
}

inline Vec3 centroid(const std::vector<Vec3>& pts) {
  Vec3 c;
  for (const auto& p : pts) c += p;
  return pts.empty() ? c : c / static_cast<double>(pts.size());
}

struct Aabb {
  Vec3 lo, hi;
  Vec3 center() const { return 0.5 * (lo + hi); }
  double diagonal() const { return norm(hi - lo); }
};

inline Aabb bounding_box(const std::vector<Vec3>& pts) {
  if (pts.empty()) throw DomainError("bounding box of empty point set");
  Aabb b{pts.front(), pts.front()};
  for (const auto& p : pts)
    for (int a = 0; a < 3; ++a) {
      b.lo[a] = std::min(b.lo[a], p[a]);
      b.hi[a] = std::max(b.hi[a], p[a]);
    }
  return b;
}

// Flattened xyz layout used by the gradient machinery.
inline std::vector<double> flatten(const std::vector<Vec3>& pts) {
  std::vector<double> out;
  out.reserve(pts.size() * 3);
  for (const auto& p : pts) {
    out.push_back(p.x);
    out.push_back(p.y);
    out.push_back(p.z);
  }
  return out;
}

inline std::vector<Vec3> unflatten(const std::vector<double>& flat) {
  std::vector<Vec3> pts(flat.size() / 3);
  for (size_t i = 0; i < pts.size(); ++i) pts[i] = {flat[3 * i], flat[3 * i + 1], flat[3 * i + 2]};
  return pts;
}

}  // namespace shadowforge
