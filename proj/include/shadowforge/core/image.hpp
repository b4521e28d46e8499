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
#include <cassert>
#include <cmath>
#include <vector>

#include "shadowforge/core/error.hpp"

namespace shadowforge {

// Row-major single-channel image. Values are nominally in [0,1] but the type
// is also used for gradient buffers, which are unbounded.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, double fill = 0.0) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {
    if (w < 0 || h < 0) throw DomainError("image dimensions must be nonnegative");
  }

  bool empty() const { return data.empty(); }
  size_t size() const { return data.size(); }
  size_t index(int x, int y) const { return static_cast<size_t>(y) * width + x; }
  double& at(int x, int y) { return data[index(x, y)]; }
  double at(int x, int y) const { return data[index(x, y)]; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }

  bool operator==(const Image&) const = default;
};

// Bilinear sample with clamp-to-edge. Pixel (i, j) holds the value at
// continuous coordinate (i, j).
inline double sample_bilinear_clamped(const Image& img, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  const int x0 = std::min(static_cast<int>(x), img.width - 1);
  const int y0 = std::min(static_cast<int>(y), img.height - 1);
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0, fy = y - y0;
  return (1 - fx) * (1 - fy) * img.at(x0, y0) + fx * (1 - fy) * img.at(x1, y0) +
         (1 - fx) * fy * img.at(x0, y1) + fx * fy * img.at(x1, y1);
}

// Resize by bilinear resampling, mapping pixel centers onto pixel centers.
inline Image resize_bilinear(const Image& src, int w, int h) {
  Image out(w, h);
  if (src.empty()) return out;
  for (int y = 0; y < h; ++y) {
    const double sy = (y + 0.5) * src.height / h - 0.5;
    for (int x = 0; x < w; ++x) {
      const double sx = (x + 0.5) * src.width / w - 0.5;
      out.at(x, y) = sample_bilinear_clamped(src, sx, sy);
    }
  }
  return out;
}

inline unsigned char to_byte(double v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

}  // namespace shadowforge
