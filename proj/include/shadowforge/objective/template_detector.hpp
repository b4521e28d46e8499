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

// Template-correlation detector: a self-contained, deterministic white-box
// stand-in for a neural car detector.
//
// A window is scored by resampling it to 32x32, taking the normalized cross
// correlation (NCC) with a clean reference crop, and mapping it through a
// two-point calibrated logistic: sigmoid(gain * ncc + bias) with
// sigmoid(gain + bias) = 0.9 and sigmoid(bias) = 0.1. The differentiable
// score at a query box aggregates the NCC of a few jittered windows with a
// temperature softmax before the logistic.

#include <cmath>
#include <optional>
#include <vector>

#include "shadowforge/objective/detector.hpp"
#include "shadowforge/scene/render.hpp"

namespace shadowforge {

constexpr int kTemplateSize = 32;

enum class WindowAggregation { kSoftmax, kMean };

struct TemplateDetectorOptions {
  // Window shifts as fractions of the query box width/height.
  std::vector<Vec2> offsets = {{-0.04, -0.04}, {0, -0.04}, {0.04, -0.04}, {-0.04, 0}, {0, 0},
                               {0.04, 0},      {-0.04, 0.04}, {0, 0.04},  {0.04, 0.04}};
  double temperature = 0.02;
  WindowAggregation aggregation = WindowAggregation::kSoftmax;
  // Sliding-window scan used by evaluate().
  std::vector<double> scales = {0.25, 0.45, 0.7};  // window size / min(image w, h)
  std::vector<double> aspects = {0.5, 1.0, 2.0};   // width / height
  int refine_top = 6;
  double refine_floor = 0.3;
  double report_floor = 0.05;
  double nms_iou = 0.5;
};

namespace detail {

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double logistic(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

// Sample positions of a crop: kTemplateSize points spanning the box edges
// inclusively, in pixel-index coordinates.
inline double crop_coord(double lo, double hi, int k) { return lo + (hi - lo) * k / (kTemplateSize - 1); }

inline std::vector<double> crop(const Image& img, const BBox& b) {
  std::vector<double> out(kTemplateSize * kTemplateSize);
  for (int j = 0; j < kTemplateSize; ++j)
    for (int i = 0; i < kTemplateSize; ++i)
      out[j * kTemplateSize + i] = sample_bilinear_clamped(img, crop_coord(b.x1, b.x2, i), crop_coord(b.y1, b.y2, j));
  return out;
}

// Adjoint of crop(): scatters crop cotangents into `grad` with the same
// clamped bilinear weights.
inline void crop_vjp(const BBox& b, const std::vector<double>& gcrop, Image& grad) {
  for (int j = 0; j < kTemplateSize; ++j)
    for (int i = 0; i < kTemplateSize; ++i) {
      const double g = gcrop[j * kTemplateSize + i];
      if (g == 0.0) continue;
      const double x = std::clamp(crop_coord(b.x1, b.x2, i), 0.0, static_cast<double>(grad.width - 1));
      const double y = std::clamp(crop_coord(b.y1, b.y2, j), 0.0, static_cast<double>(grad.height - 1));
      const int x0 = std::min(static_cast<int>(x), grad.width - 1);
      const int y0 = std::min(static_cast<int>(y), grad.height - 1);
      const int x1 = std::min(x0 + 1, grad.width - 1), y1 = std::min(y0 + 1, grad.height - 1);
      const double fx = x - x0, fy = y - y0;
      grad.at(x0, y0) += g * (1 - fx) * (1 - fy);
      grad.at(x1, y0) += g * fx * (1 - fy);
      grad.at(x0, y1) += g * (1 - fx) * fy;
      grad.at(x1, y1) += g * fx * fy;
    }
}

constexpr double kZeroVariance = 1e-12;

// Zero-mean, unit-norm copy; all zeros when the input is flat.
inline std::vector<double> standardize(const std::vector<double>& v, double* norm_out = nullptr) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  std::vector<double> c(v.size());
  double ss = 0.0;
  for (size_t i = 0; i < v.size(); ++i) {
    c[i] = v[i] - mean;
    ss += c[i] * c[i];
  }
  const double n = std::sqrt(ss);
  if (norm_out) *norm_out = n;
  if (ss < kZeroVariance) return std::vector<double>(v.size(), 0.0);
  for (double& x : c) x /= n;
  return c;
}

}  // namespace detail

class TemplateDetector : public Detector {
 public:
  TemplateDetector() = default;

  // `reference` is a kTemplateSize^2 crop of the clean car.
  TemplateDetector(std::vector<double> reference, TemplateDetectorOptions options = {})
      : reference_(std::move(reference)), options_(std::move(options)) {
    if (reference_.size() != static_cast<size_t>(kTemplateSize * kTemplateSize))
      throw DomainError("template must be 32x32");
    for (double v : reference_)
      if (!(v >= 0.0 && v <= 1.0)) throw DomainError("template values must lie in [0,1]");
    if (options_.offsets.empty()) throw DomainError("template detector needs at least one window offset");
    if (!(options_.temperature > 0.0)) throw DomainError("template detector temperature must be positive");
    normalized_ = detail::standardize(reference_);
    bias_ = detail::logit(0.1);
    gain_ = detail::logit(0.9) - bias_;
  }

  const std::vector<double>& reference() const { return reference_; }
  const TemplateDetectorOptions& options() const { return options_; }
  double gain() const { return gain_; }
  double bias() const { return bias_; }

  // NCC of the window `box` against the template; d(ncc)/d(crop) when asked.
  double ncc(const Image& image, const BBox& box, std::vector<double>* dcrop = nullptr) const {
    const auto c = detail::crop(image, box);
    double n = 0.0;
    const auto cs = detail::standardize(c, &n);
    if (n * n < detail::kZeroVariance) {
      if (dcrop) dcrop->assign(c.size(), 0.0);
      return 0.0;
    }
    double r = 0.0;
    for (size_t i = 0; i < c.size(); ++i) r += cs[i] * normalized_[i];
    if (dcrop) {
      // d/dc [ (c - mean) . t / |c - mean| ] = (t - r * cs) / |c - mean|
      dcrop->resize(c.size());
      for (size_t i = 0; i < c.size(); ++i) (*dcrop)[i] = (normalized_[i] - r * cs[i]) / n;
    }
    return r;
  }

  // Calibrated score of a single window.
  double window_score(const Image& image, const BBox& box) const {
    return detail::logistic(gain_ * ncc(image, box) + bias_);
  }

  std::vector<BBox> query_windows(const BBox& query) const {
    std::vector<BBox> out;
    out.reserve(options_.offsets.size());
    const double w = query.width(), h = query.height();
    for (const auto& o : options_.offsets)
      out.push_back({query.x1 + o.x * w, query.y1 + o.y * h, query.x2 + o.x * w, query.y2 + o.y * h});
    return out;
  }

  bool differentiable() const override { return true; }

  double score(const Image& image, const BBox& query, Image* grad) const override {
    const auto windows = query_windows(query);
    const size_t k = windows.size();
    std::vector<double> r(k);
    std::vector<std::vector<double>> dcrop(grad ? k : 0);
    for (size_t i = 0; i < k; ++i) r[i] = ncc(image, windows[i], grad ? &dcrop[i] : nullptr);

    std::vector<double> w(k, 1.0 / static_cast<double>(k));
    if (options_.aggregation == WindowAggregation::kSoftmax) {
      const double mx = *std::max_element(r.begin(), r.end());
      double z = 0.0;
      for (size_t i = 0; i < k; ++i) z += (w[i] = std::exp((r[i] - mx) / options_.temperature));
      for (double& x : w) x /= z;
    }
    double agg = 0.0;
    for (size_t i = 0; i < k; ++i) agg += w[i] * r[i];
    const double s = detail::logistic(gain_ * agg + bias_);

    if (grad) {
      *grad = Image(image.width, image.height);
      const double ds_dagg = gain_ * s * (1.0 - s);
      for (size_t i = 0; i < k; ++i) {
        double dagg_dr = w[i];
        if (options_.aggregation == WindowAggregation::kSoftmax) dagg_dr += w[i] * (r[i] - agg) / options_.temperature;
        const double g = ds_dagg * dagg_dr;
        if (g == 0.0) continue;
        std::vector<double> gc(dcrop[i].size());
        for (size_t j = 0; j < gc.size(); ++j) gc[j] = g * dcrop[i][j];
        detail::crop_vjp(windows[i], gc, *grad);
      }
    }
    return s;
  }

  // Coarse multi-scale scan (stride = window / 4), coordinate-ascent box
  // refinement of the strongest candidates, then greedy NMS.
  std::vector<Detection> evaluate(const Image& image) const override {
    std::vector<Detection> all;
    const double base = std::min(image.width, image.height);
    for (double sc : options_.scales)
      for (double asp : options_.aspects) {
        const double w = std::min<double>(image.width - 1, base * sc * std::sqrt(asp));
        const double h = std::min<double>(image.height - 1, base * sc / std::sqrt(asp));
        const double sx = std::max(1.0, w / 4.0), sy = std::max(1.0, h / 4.0);
        for (double y = 0; y + h <= image.height - 1 + 1e-9; y += sy)
          for (double x = 0; x + w <= image.width - 1 + 1e-9; x += sx) {
            const BBox b{x, y, x + w, y + h};
            all.push_back({b, window_score(image, b), "car"});
          }
      }
    std::vector<size_t> order(all.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return all[a].score > all[b].score; });
    for (int i = 0; i < options_.refine_top && i < static_cast<int>(order.size()); ++i) {
      Detection& d = all[order[i]];
      if (d.score < options_.refine_floor) break;
      d = refine(image, d);
    }
    std::vector<Detection> kept;
    for (auto& d : non_max_suppression(std::move(all), options_.nms_iou))
      if (d.score >= options_.report_floor) kept.push_back(d);
    return kept;
  }

  // Greedy coordinate ascent on the four box edges with halving steps.
  Detection refine(const Image& image, Detection d) const {
    double step = 0.125 * std::max(d.box.width(), d.box.height());
    while (step >= 0.5) {
      bool improved = true;
      int guard = 0;
      while (improved && guard++ < 20) {
        improved = false;
        for (int edge = 0; edge < 4; ++edge)
          for (double dir : {-1.0, 1.0}) {
            BBox b = d.box;
            double* coord = edge == 0 ? &b.x1 : edge == 1 ? &b.y1 : edge == 2 ? &b.x2 : &b.y2;
            *coord += dir * step;
            b.x1 = std::max(0.0, b.x1);
            b.y1 = std::max(0.0, b.y1);
            b.x2 = std::min<double>(image.width - 1, b.x2);
            b.y2 = std::min<double>(image.height - 1, b.y2);
            if (b.width() < 4 || b.height() < 4) continue;
            const double s = window_score(image, b);
            if (s > d.score + 1e-12) {
              d.box = b;
              d.score = s;
              improved = true;
            }
          }
      }
      step *= 0.5;
    }
    return d;
  }

 private:
  std::vector<double> reference_;
  std::vector<double> normalized_;
  TemplateDetectorOptions options_;
  double gain_ = 0.0, bias_ = 0.0;
};

// Reference crop of the clean car at the calibration view. The detector is
// rejected unless it scores the calibration image at >= 0.85.
inline TemplateDetector build_template_detector(const RenderedImage& calibration, TemplateDetectorOptions options = {}) {
  const auto gt = silhouette_bbox(calibration);
  if (!gt || !gt->valid()) throw DomainError("calibration render has an empty silhouette");
  TemplateDetector det(detail::crop(calibration.gray, *gt), std::move(options));
  if (det.window_score(calibration.gray, *gt) < 0.85) throw DomainError("template detector failed calibration");
  return det;
}

inline TemplateDetector build_template_detector(const TriMesh& car, const Image& texture, const CameraParams& cam,
                                                const Background& background, TemplateDetectorOptions options = {}) {
  return build_template_detector(render(car, texture, cam, background), std::move(options));
}

}  // namespace shadowforge
