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

// Mesh smoothness regularizers. Each returns the loss value and, when a
// gradient buffer is passed, accumulates d(loss)/d(input) into it (the buffer
// is resized and zeroed first).

#include <cmath>
#include <vector>

#include "shadowforge/geometry/kdtree.hpp"
#include "shadowforge/geometry/mesh.hpp"
#include "shadowforge/geometry/sampling.hpp"

namespace shadowforge {

struct LossWeights {
  double normal = 0.5;     // w1
  double edge = 1.0;       // w2
  double chamfer = 1.0;    // w3
  double laplacian = 0.3;  // w4
};

inline void validate(const LossWeights& w) {
  if (w.normal < 0 || w.edge < 0 || w.chamfer < 0 || w.laplacian < 0)
    throw DomainError("loss weights must be nonnegative");
}

namespace detail {
inline void reset(std::vector<Vec3>* grad, size_t n) {
  if (grad) grad->assign(n, Vec3{});
}
}  // namespace detail

// Mean of (1 - cos) between the unit normals of every pair of faces sharing
// an edge; each unordered pair counted once.
inline double normal_consistency(const TriMesh& mesh, std::vector<Vec3>* grad = nullptr) {
  const auto edges = build_edges(mesh);
  std::vector<Vec3> raw(mesh.faces.size()), unit(mesh.faces.size());
  std::vector<double> len(mesh.faces.size());
  for (size_t f = 0; f < mesh.faces.size(); ++f) {
    raw[f] = face_normal_unnormalized(mesh, mesh.faces[f]);
    len[f] = norm(raw[f]);
    unit[f] = raw[f] / len[f];
  }
  int pairs = 0;
  double total = 0.0;
  std::vector<Vec3> grad_unit(mesh.faces.size());
  for (const Edge& e : edges) {
    if (e.f1 < 0) continue;
    ++pairs;
    total += 1.0 - dot(unit[e.f0], unit[e.f1]);
    grad_unit[e.f0] -= unit[e.f1];
    grad_unit[e.f1] -= unit[e.f0];
  }
  if (pairs == 0) throw DomainError("no adjacent faces");
  const double value = total / pairs;
  if (grad) {
    detail::reset(grad, mesh.vertices.size());
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
      const Vec3 gu = grad_unit[f] / static_cast<double>(pairs);
      const Vec3 gn = (gu - unit[f] * dot(unit[f], gu)) / len[f];
      const Face& tri = mesh.faces[f];
      const Vec3 e1 = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
      const Vec3 e2 = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
      const Vec3 g1 = cross(e2, gn), g2 = cross(gn, e1);
      (*grad)[tri[1]] += g1;
      (*grad)[tri[2]] += g2;
      (*grad)[tri[0]] -= g1 + g2;
    }
  }
  return value;
}

// Mean length over unique undirected edges.
inline double edge_length_mean(const TriMesh& mesh, std::vector<Vec3>* grad = nullptr) {
  const auto edges = build_edges(mesh);
  if (edges.empty()) throw DomainError("mesh has no edges");
  const double inv = 1.0 / static_cast<double>(edges.size());
  detail::reset(grad, mesh.vertices.size());
  double total = 0.0;
  for (const Edge& e : edges) {
    const Vec3 d = mesh.vertices[e.v1] - mesh.vertices[e.v0];
    const double l = norm(d);
    total += l;
    if (grad && l > 0.0) {
      (*grad)[e.v1] += d * (inv / l);
      (*grad)[e.v0] -= d * (inv / l);
    }
  }
  return total * inv;
}

// Symmetric chamfer distance in sum form:
//   sum_p min_q |p - q|^2 + sum_q min_p |q - p|^2.
// Nearest matches are treated as constant when differentiating.
inline double chamfer(const std::vector<Vec3>& s1, const std::vector<Vec3>& s2, std::vector<Vec3>* grad1 = nullptr,
                      std::vector<Vec3>* grad2 = nullptr) {
  if (s1.empty() || s2.empty()) throw DomainError("chamfer distance of an empty point cloud");
  detail::reset(grad1, s1.size());
  detail::reset(grad2, s2.size());
  double total = 0.0;
  auto one_way = [&](const std::vector<Vec3>& from, const std::vector<Vec3>& to, std::vector<Vec3>* gfrom,
                     std::vector<Vec3>* gto) {
    const KdTree tree(to);
    for (size_t i = 0; i < from.size(); ++i) {
      const auto hit = tree.nearest(from[i]);
      total += hit.dist2;
      const Vec3 d = 2.0 * (from[i] - to[hit.index]);
      if (gfrom) (*gfrom)[i] += d;
      if (gto) (*gto)[hit.index] -= d;
    }
  };
  one_way(s1, s2, grad1, grad2);
  one_way(s2, s1, grad2, grad1);
  return total;
}

inline double chamfer(const PointCloud& s1, const PointCloud& s2, std::vector<Vec3>* grad1 = nullptr,
                      std::vector<Vec3>* grad2 = nullptr) {
  return chamfer(s1.points, s2.points, grad1, grad2);
}

// Uniform-weight Laplacian: mean over vertices of |mean(neighbours) - v_i|.
inline double laplacian_smoothing(const TriMesh& mesh, std::vector<Vec3>* grad = nullptr) {
  const auto nbrs = vertex_neighbors(mesh);
  const size_t n = mesh.vertices.size();
  if (n == 0) throw DomainError("laplacian of an empty mesh");
  detail::reset(grad, n);
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (nbrs[i].empty()) throw DomainError("isolated vertex " + std::to_string(i));
    Vec3 mean;
    for (int j : nbrs[i]) mean += mesh.vertices[j];
    const double inv_deg = 1.0 / static_cast<double>(nbrs[i].size());
    const Vec3 lap = mean * inv_deg - mesh.vertices[i];
    const double l = norm(lap);
    total += l;
    if (grad && l > 0.0) {
      const Vec3 g = lap * (inv_n / l);
      (*grad)[i] -= g;
      for (int j : nbrs[i]) (*grad)[j] += g * inv_deg;
    }
  }
  return total * inv_n;
}

// Total objective: L_det + w1 L_norm + w2 L_edge + w3 L_chamfer + w4 L_laplace.
inline double combine(double l_det, double l_norm, double l_edge, double l_chamfer, double l_laplace,
                      const LossWeights& w) {
  for (double v : {l_det, l_norm, l_edge, l_chamfer, l_laplace})
    if (!std::isfinite(v)) throw DomainError("combine: non-finite loss term");
  validate(w);
  return l_det + w.normal * l_norm + w.edge * l_edge + w.chamfer * l_chamfer + w.laplacian * l_laplace;
}

}  // namespace shadowforge
