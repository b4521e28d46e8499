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

// Control-point deformation: each mesh vertex moves by a normalized
// Gaussian-weighted average of the displacements attached to a small set of
// 3D anchors. Displacements of nearby vertices are therefore strongly
// correlated, which rules out isolated spikes on the surface.
//
//   w_ij  = exp(-|v_i - c_j|^2 / (2 sigma^2))
//   wn_ij = w_ij / sum_j w_ij          (uniform 1/K if the row underflows)
//   v'_i  = v_i + sum_j wn_ij * d_j
//
// The kernel is a strategy choice; ControlPointBasis is the only place that
// knows about it.

#include <vector>

#include "shadowforge/geometry/mesh.hpp"

namespace shadowforge {

struct ControlPointSet {
  std::vector<Vec3> anchors;
  std::vector<Vec3> offsets;
  double sigma = 1.0;

  size_t size() const { return anchors.size(); }
};

inline void validate(const ControlPointSet& c) {
  if (c.anchors.empty()) throw DomainError("control point set needs at least one anchor");
  if (c.offsets.size() != c.anchors.size()) throw DomainError("control point offsets and anchors differ in count");
  if (!(c.sigma > 0.0)) throw DomainError("control point bandwidth must be positive");
}

// 3x3x3 lattice over the bounding box of `base` with the center removed
// (26 anchors), zero offsets, sigma = 0.5 * diagonal / 3.
inline ControlPointSet make_lattice_control_points(const TriMesh& base) {
  const Aabb box = bounding_box(base.vertices);
  ControlPointSet c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        if (i == 1 && j == 1 && k == 1) continue;
        const Vec3 t{i / 2.0, j / 2.0, k / 2.0};
        c.anchors.push_back({box.lo.x + t.x * (box.hi.x - box.lo.x), box.lo.y + t.y * (box.hi.y - box.lo.y),
                             box.lo.z + t.z * (box.hi.z - box.lo.z)});
      }
  c.offsets.assign(c.anchors.size(), Vec3{});
  c.sigma = 0.5 * box.diagonal() / 3.0;
  return c;
}

// Precomputed row-normalized weight matrix for a fixed base mesh and anchor
// layout. apply() and vjp() are then plain dense products.
class ControlPointBasis {
 public:
  ControlPointBasis() = default;

  ControlPointBasis(const std::vector<Vec3>& base_vertices, const std::vector<Vec3>& anchors, double sigma)
      : base_(base_vertices), num_anchors_(anchors.size()), weights_(base_vertices.size() * anchors.size()) {
    if (anchors.empty()) throw DomainError("control point set needs at least one anchor");
    if (!(sigma > 0.0)) throw DomainError("control point bandwidth must be positive");
    if (base_vertices.empty()) throw DomainError("control point deformation needs at least one vertex");
    const double inv = 1.0 / (2.0 * sigma * sigma);
    for (size_t i = 0; i < base_.size(); ++i) {
      double* row = &weights_[i * num_anchors_];
      double sum = 0.0;
      for (size_t j = 0; j < num_anchors_; ++j) {
        row[j] = std::exp(-squared_norm(base_[i] - anchors[j]) * inv);
        sum += row[j];
      }
      if (sum > 0.0) {
        for (size_t j = 0; j < num_anchors_; ++j) row[j] /= sum;
      } else {
        ++underflow_rows_;
        for (size_t j = 0; j < num_anchors_; ++j) row[j] = 1.0 / static_cast<double>(num_anchors_);
      }
    }
  }

  size_t num_vertices() const { return base_.size(); }
  size_t num_anchors() const { return num_anchors_; }
  // Rows that fell back to uniform weights.
  size_t underflow_rows() const { return underflow_rows_; }
  double weight(size_t vertex, size_t anchor) const { return weights_[vertex * num_anchors_ + anchor]; }

  std::vector<Vec3> apply(const std::vector<Vec3>& offsets) const {
    if (offsets.size() != num_anchors_) throw DomainError("offset count does not match anchor count");
    std::vector<Vec3> out(base_);
    for (size_t i = 0; i < base_.size(); ++i) {
      const double* row = &weights_[i * num_anchors_];
      for (size_t j = 0; j < num_anchors_; ++j) out[i] += row[j] * offsets[j];
    }
    return out;
  }

  // Cotangent on deformed vertices -> cotangent on offsets.
  std::vector<Vec3> vjp(const std::vector<Vec3>& grad_vertices) const {
    std::vector<Vec3> g(num_anchors_);
    for (size_t i = 0; i < base_.size(); ++i) {
      const double* row = &weights_[i * num_anchors_];
      for (size_t j = 0; j < num_anchors_; ++j) g[j] += row[j] * grad_vertices[i];
    }
    return g;
  }

 private:
  std::vector<Vec3> base_;
  size_t num_anchors_ = 0;
  std::vector<double> weights_;
  size_t underflow_rows_ = 0;
};

inline TriMesh apply_control_points(const TriMesh& base, const ControlPointSet& c) {
  validate(c);
  TriMesh out = base;
  out.vertices = ControlPointBasis(base.vertices, c.anchors, c.sigma).apply(c.offsets);
  return out;
}

}  // namespace shadowforge
