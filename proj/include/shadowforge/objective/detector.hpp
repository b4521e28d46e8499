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
#include <numeric>
#include <string>
#include <vector>

#include "shadowforge/core/bbox.hpp"
#include "shadowforge/core/error.hpp"
#include "shadowforge/core/image.hpp"

namespace shadowforge {

struct Detection {
  BBox box;
  double score = 0.0;
  std::string label = "car";

  bool operator==(const Detection&) const = default;
};

inline void validate(const Detection& d) {
  if (!(d.box.x1 < d.box.x2 && d.box.y1 < d.box.y2)) throw DomainError("detection box must satisfy x1<x2, y1<y2");
  if (!(d.score >= 0.0 && d.score <= 1.0)) throw DomainError("detection score must lie in [0,1]");
}

// Black-box detectors implement evaluate(); white-box ones additionally
// expose a differentiable object confidence at a given box.
class Detector {
 public:
  virtual ~Detector() = default;

  virtual std::vector<Detection> evaluate(const Image& image) const = 0;

  virtual bool differentiable() const { return false; }

  // Object confidence at `box`; when grad is non-null it receives
  // d(score)/d(image), same shape as the image.
  virtual double score(const Image& /*image*/, const BBox& /*box*/, Image* /*grad*/) const {
    throw CapabilityError("detector does not provide a differentiable score");
  }
};

// Object confidence the attack minimizes: the detector's score at the
// ground-truth box.
inline double detection_loss(const Detector& det, const Image& image, const BBox& gt, Image* grad = nullptr) {
  if (!det.differentiable()) throw CapabilityError("detection loss needs a white-box detector");
  return det.score(image, gt, grad);
}

// Greedy suppression by descending score (stable for ties).
inline std::vector<Detection> non_max_suppression(std::vector<Detection> dets, double iou_threshold) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) { return a.score > b.score; });
  std::vector<Detection> kept;
  for (const auto& d : dets) {
    bool suppressed = false;
    for (const auto& k : kept)
      if (iou(d.box, k.box) > iou_threshold) {
        suppressed = true;
        break;
      }
    if (!suppressed) kept.push_back(d);
  }
  return kept;
}

}  // namespace shadowforge
