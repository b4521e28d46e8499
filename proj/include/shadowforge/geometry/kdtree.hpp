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
#include <limits>
#include <numeric>
#include <vector>

#include "shadowforge/core/vec.hpp"

namespace shadowforge {

// Static 3-d tree for exact nearest-neighbour queries. Ties resolve to the
// lowest point index.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& pts) : pts_(pts), order_(pts.size()) {
    std::iota(order_.begin(), order_.end(), 0);
    nodes_.reserve(pts.size());
    if (!pts.empty()) root_ = build(0, static_cast<int>(pts.size()), 0);
  }

  struct Hit {
    int index = -1;
    double dist2 = std::numeric_limits<double>::infinity();
  };

  Hit nearest(const Vec3& q) const {
    Hit best;
    if (root_ >= 0) search(root_, q, best);
    return best;
  }

 private:
  struct Node {
    int point;
    int axis;
    int left = -1, right = -1;
  };

  int build(int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 3;
    const int mid = (lo + hi) / 2;
    std::nth_element(order_.begin() + lo, order_.begin() + mid, order_.begin() + hi, [&](int a, int b) {
      const double pa = pts_[a][axis], pb = pts_[b][axis];
      return pa < pb || (pa == pb && a < b);
    });
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({order_[mid], axis});
    const int l = build(lo, mid, depth + 1);
    const int r = build(mid + 1, hi, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  void search(int node, const Vec3& q, Hit& best) const {
    const Node& n = nodes_[node];
    const double d2 = squared_norm(q - pts_[n.point]);
    if (d2 < best.dist2 || (d2 == best.dist2 && n.point < best.index)) best = {n.point, d2};
    const double delta = q[n.axis] - pts_[n.point][n.axis];
    const int near = delta < 0 ? n.left : n.right;
    const int far = delta < 0 ? n.right : n.left;
    if (near >= 0) search(near, q, best);
    if (far >= 0 && delta * delta <= best.dist2) search(far, q, best);
  }

  std::vector<Vec3> pts_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace shadowforge
