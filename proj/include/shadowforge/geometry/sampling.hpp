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
#include <cstdint>
#include <vector>

#include "shadowforge/core/random.hpp"
#include "shadowforge/geometry/mesh.hpp"

namespace shadowforge {

struct SamplePoint {
  int face;
  Vec3 bary;  // weights of the face's three corners
};

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<SamplePoint> provenance;  // empty for free-standing clouds

  size_t size() const { return points.size(); }
};

inline std::vector<Vec3> points_from_provenance(const TriMesh& mesh, const std::vector<SamplePoint>& prov) {
  std::vector<Vec3> pts;
  pts.reserve(prov.size());
  for (const auto& s : prov) {
    const Face& f = mesh.faces[s.face];
    pts.push_back(s.bary.x * mesh.vertices[f[0]] + s.bary.y * mesh.vertices[f[1]] + s.bary.z * mesh.vertices[f[2]]);
  }
  return pts;
}

// Area-weighted uniform sampling. The (face, barycentric) provenance depends
// only on the seed and the face areas, so under fixed provenance the points
// are a linear function of the vertices.
inline PointCloud surface_sample(const TriMesh& mesh, int n, std::uint64_t seed) {
  if (n < 1) throw DomainError("surface_sample needs n >= 1");
  if (mesh.faces.empty()) throw DomainError("surface_sample on a mesh without faces");
  std::vector<double> cumulative(mesh.faces.size());
  double total = 0.0;
  for (size_t i = 0; i < mesh.faces.size(); ++i) {
    total += face_area(mesh, mesh.faces[i]);
    cumulative[i] = total;
  }
  if (!(total > 0.0)) throw DomainError("surface_sample on a degenerate mesh");

  Rng rng(seed);
  PointCloud cloud;
  cloud.provenance.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double pick = uniform01(rng) * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const int face = static_cast<int>(std::min<size_t>(it - cumulative.begin(), mesh.faces.size() - 1));
    const double r1 = std::sqrt(uniform01(rng));
    const double r2 = uniform01(rng);
    cloud.provenance.push_back({face, {1.0 - r1, r1 * (1.0 - r2), r1 * r2}});
  }
  cloud.points = points_from_provenance(mesh, cloud.provenance);
  return cloud;
}

// Cotangent on sampled points -> cotangent on mesh vertices.
inline std::vector<Vec3> surface_sample_vjp(const TriMesh& mesh, const std::vector<SamplePoint>& prov,
                                            const std::vector<Vec3>& grad_points) {
  std::vector<Vec3> g(mesh.vertices.size());
  for (size_t k = 0; k < prov.size(); ++k) {
    const Face& f = mesh.faces[prov[k].face];
    g[f[0]] += prov[k].bary.x * grad_points[k];
    g[f[1]] += prov[k].bary.y * grad_points[k];
    g[f[2]] += prov[k].bary.z * grad_points[k];
  }
  return g;
}

inline TriMesh vertex_jitter(const TriMesh& mesh, double sigma, std::uint64_t seed) {
  if (sigma < 0.0) throw DomainError("vertex jitter sigma must be nonnegative");
  TriMesh out = mesh;
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (auto& v : out.vertices) {
    v.x += sigma * standard_normal(rng);
    v.y += sigma * standard_normal(rng);
    v.z += sigma * standard_normal(rng);
  }
  return out;
}

}  // namespace shadowforge
