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
#include <gtest/gtest.h>

#include <cmath>

#include "shadowforge/objective/template_detector.hpp"
#include "shadowforge/scene/model.hpp"
#include "test_util.hpp"

namespace sf = shadowforge;

namespace {

struct Calibrated {
  sf::CarModel model = sf::load_model(sftest::asset("demo_car/model.json"));
  sf::RenderedImage clean = sf::render(model.mesh, model.texture, model.calibration_view, model.background);
  sf::BBox gt = *sf::silhouette_bbox(clean);
  sf::TemplateDetector det = sf::build_template_detector(clean);
};

const Calibrated& calibrated() {
  static const Calibrated c;
  return c;
}

// Independent NCC: Pearson correlation of two equally sized samples.
double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  double ma = 0, mb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= a.size();
  mb /= b.size();
  double sab = 0, saa = 0, sbb = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

// Template resampled to size x size pixels and written at (x0, y0).
void stamp(sf::Image& img, const std::vector<double>& ref, int x0, int y0, int size) {
  const int t = sf::kTemplateSize;
  for (int j = 0; j < size; ++j)
    for (int i = 0; i < size; ++i) {
      const double u = i * (t - 1.0) / (size - 1), v = j * (t - 1.0) / (size - 1);
      const int iu = std::min(static_cast<int>(u), t - 2), iv = std::min(static_cast<int>(v), t - 2);
      const double fu = u - iu, fv = v - iv;
      img.at(x0 + i, y0 + j) = (1 - fu) * (1 - fv) * ref[iv * t + iu] + fu * (1 - fv) * ref[iv * t + iu + 1] +
                               (1 - fu) * fv * ref[(iv + 1) * t + iu] + fu * fv * ref[(iv + 1) * t + iu + 1];
    }
}

// Exhaustive stride-1 scan over the detector's window shapes, scored with an
// independent correlation, then greedy suppression.
std::vector<sf::Detection> brute_force_scan(const sf::Image& img, const std::vector<double>& ref,
                                            const sf::TemplateDetectorOptions& opt) {
  const int t = sf::kTemplateSize;
  const double base = std::min(img.width, img.height);
  std::vector<sf::Detection> all;
  for (double sc : opt.scales)
    for (double asp : opt.aspects) {
      const double w = std::min<double>(img.width - 1, base * sc * std::sqrt(asp));
      const double h = std::min<double>(img.height - 1, base * sc / std::sqrt(asp));
      for (int y = 0; y + h <= img.height - 1; ++y)
        for (int x = 0; x + w <= img.width - 1; ++x) {
          std::vector<double> crop(t * t);
          for (int j = 0; j < t; ++j)
            for (int i = 0; i < t; ++i)
              crop[j * t + i] = sf::sample_bilinear_clamped(img, x + i * w / (t - 1), y + j * h / (t - 1));
          const double r = pearson(crop, ref);
          const double score = 1.0 / (1.0 + std::exp(-(std::log(81.0) * (std::isfinite(r) ? r : 0.0) - std::log(9.0))));
          all.push_back({{double(x), double(y), x + w, y + h}, score});
        }
    }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  std::vector<sf::Detection> kept;
  for (const auto& d : all) {
    bool keep = true;
    for (const auto& k : kept) keep = keep && sf::iou(d.box, k.box) <= 0.5;
    if (keep) kept.push_back(d);
  }
  return kept;
}

// Fraction of `inner` covered by `outer`.
double covered(const sf::BBox& inner, const sf::BBox& outer) {
  const double iw = std::min(inner.x2, outer.x2) - std::max(inner.x1, outer.x1);
  const double ih = std::min(inner.y2, outer.y2) - std::max(inner.y1, outer.y1);
  return iw <= 0 || ih <= 0 ? 0.0 : iw * ih / inner.area();
}

}  // namespace

TEST(TemplateDetector, CalibrationWindowScoresPointNine) {
  const auto& c = calibrated();
  EXPECT_NEAR(c.det.window_score(c.clean.gray, c.gt), 0.9, 1e-6);
  EXPECT_NEAR(c.det.score(c.clean.gray, c.gt, nullptr), 0.9, 1e-3);
  EXPECT_NEAR(sf::detection_loss(c.det, c.clean.gray, c.gt), 0.9, 1e-3);
}

TEST(TemplateDetector, LogisticEndpoints) {
  const auto& c = calibrated();
  EXPECT_NEAR(1.0 / (1.0 + std::exp(-(c.det.gain() + c.det.bias()))), 0.9, 1e-12);
  EXPECT_NEAR(1.0 / (1.0 + std::exp(-c.det.bias())), 0.1, 1e-12);
}

TEST(TemplateDetector, ConstantImageScoresPointOne) {
  const auto& c = calibrated();
  const sf::Image flat(256, 256, 0.4);
  EXPECT_NEAR(c.det.score(flat, c.gt, nullptr), 0.1, 1e-12);
  const auto dets = c.det.evaluate(flat);
  for (const auto& d : dets) EXPECT_LE(d.score, 0.1 + 1e-12);
}

TEST(TemplateDetector, InvertedImageScoresBelowPointOne) {
  const auto& c = calibrated();
  auto inv = c.clean.gray;
  for (double& v : inv.data) v = 1.0 - v;
  EXPECT_LT(c.det.score(inv, c.gt, nullptr), 0.1);
}

TEST(TemplateDetector, DeterministicConstruction) {
  const auto& c = calibrated();
  const auto again = sf::build_template_detector(c.model.mesh, c.model.texture, c.model.calibration_view, c.model.background);
  EXPECT_EQ(again.reference(), c.det.reference());
  EXPECT_EQ(again.gain(), c.det.gain());
  EXPECT_EQ(again.bias(), c.det.bias());
}

TEST(TemplateDetector, CalibrationRenderYieldsOneConfidentDetection) {
  const auto& c = calibrated();
  int confident = 0;
  for (const auto& d : c.det.evaluate(c.clean.gray)) {
    if (d.score < 0.6) continue;
    ++confident;
    EXPECT_GE(d.score, 0.85);
    EXPECT_GT(sf::iou(d.box, c.gt), 0.5);
  }
  EXPECT_EQ(confident, 1);
}

// Sub-windows of a stamp also correlate with the whole template, so more than
// two windows can pass 0.6 after suppression; the brute-force scan shows the
// same. The two strongest detections are the two stamps and every other
// confident detection lies on one of them.
TEST(TemplateDetector, TwoStampedTemplatesGiveTwoObjects) {
  const auto& c = calibrated();
  sf::Image img(256, 96, 0.35);
  const int size = 43;
  stamp(img, c.det.reference(), 10, 26, size);
  stamp(img, c.det.reference(), 201, 23, size);
  const sf::BBox stamps[2] = {{10, 26, 52, 68}, {201, 23, 243, 65}};
  const auto oracle = brute_force_scan(img, c.det.reference(), c.det.options());
  ASSERT_GE(oracle.size(), 2u);
  const auto dets = c.det.evaluate(img);
  ASSERT_GE(dets.size(), 2u);
  for (int k = 0; k < 2; ++k) {
    EXPECT_GE(dets[k].score, 0.85);
    EXPECT_GT(std::max(sf::iou(dets[k].box, oracle[0].box), sf::iou(dets[k].box, oracle[1].box)), 0.5);
    EXPECT_GT(std::max(sf::iou(dets[k].box, stamps[0]), sf::iou(dets[k].box, stamps[1])), 0.5);
  }
  EXPECT_NE(dets[0].box.x1 < 128, dets[1].box.x1 < 128);
  for (const auto& d : dets) {
    if (d.score >= 0.6) {
      EXPECT_GT(std::max(covered(d.box, stamps[0]), covered(d.box, stamps[1])), 0.5);
    }
  }
  for (size_t k = 2; k < oracle.size(); ++k) {
    if (oracle[k].score >= 0.6) {
      EXPECT_GT(std::max(covered(oracle[k].box, stamps[0]), covered(oracle[k].box, stamps[1])), 0.5);
    }
  }
}

TEST(TemplateDetector, BlankImageHasNoDetection) {
  const auto& c = calibrated();
  for (const auto& d : c.det.evaluate(sf::Image(256, 256, 0.0))) EXPECT_LE(d.score, 0.1 + 1e-12);
}

TEST(TemplateDetector, AffineIntensityInvariance) {
  const auto& c = calibrated();
  sf::Rng rng(1);
  auto img = c.clean.gray;
  for (double& v : img.data) v = std::clamp(v + 0.05 * sf::standard_normal(rng), 0.0, 1.0);
  const double base = c.det.score(img, c.gt, nullptr);
  auto shifted = img, scaled = img;
  for (double& v : shifted.data) v += 0.3;
  for (double& v : scaled.data) v *= 0.4;
  EXPECT_NEAR(c.det.score(shifted, c.gt, nullptr), base, 1e-9);
  EXPECT_NEAR(c.det.score(scaled, c.gt, nullptr), base, 1e-9);
}

TEST(TemplateDetector, EvaluateAgreesWithSingleWindowScore) {
  const auto& c = calibrated();
  sf::TemplateDetectorOptions opt;
  opt.offsets = {{0, 0}};
  const sf::TemplateDetector single(c.det.reference(), opt);
  const auto dets = c.det.evaluate(c.clean.gray);
  ASSERT_FALSE(dets.empty());
  for (const auto& d : dets) EXPECT_NEAR(single.score(c.clean.gray, d.box, nullptr), d.score, 1e-9);
}

TEST(DetectionLoss, OccludedCarDropsBelowHalf) {
  const auto& c = calibrated();
  const sf::Image painted(c.model.texture.width, c.model.texture.height, 0.15);
  const auto img = sf::render(c.model.mesh, painted, c.model.calibration_view, c.model.background);
  EXPECT_LT(sf::detection_loss(c.det, img.gray, c.gt), 0.5);
}

TEST(DetectionLoss, RangeOnRandomTextures) {
  const auto& c = calibrated();
  sf::Rng rng(2);
  auto cam = c.model.calibration_view;
  cam.width = cam.height = 96;
  const auto small = sf::render(c.model.mesh, c.model.texture, cam, c.model.background);
  const auto det = sf::build_template_detector(small);
  const auto gt = *sf::silhouette_bbox(small);
  const auto map = sf::rasterize(c.model.mesh, sf::camera_matrix(cam, sf::centroid(c.model.mesh.vertices)),
                                 c.model.texture.width, c.model.texture.height);
  const sf::Image bg(96, 96, 0.35);
  for (int k = 0; k < 100; ++k) {
    sf::Image tex(c.model.texture.width, c.model.texture.height);
    for (double& v : tex.data) v = sf::uniform01(rng);
    const double l = sf::detection_loss(det, sf::shade(map, tex, bg).gray, gt);
    EXPECT_GE(l, 0.0);
    EXPECT_LE(l, 1.0);
  }
}

TEST(DetectionLoss, BlackBoxDetectorRejected) {
  struct Stub : sf::Detector {
    std::vector<sf::Detection> evaluate(const sf::Image&) const override { return {}; }
  } stub;
  EXPECT_THROW(sf::detection_loss(stub, sf::Image(8, 8), {0, 0, 4, 4}), sf::CapabilityError);
}

TEST(Nms, GreedyByScore) {
  std::vector<sf::Detection> d = {{{0, 0, 10, 10}, 0.7}, {{1, 1, 11, 11}, 0.9}, {{20, 20, 30, 30}, 0.5}, {{21, 20, 31, 30}, 0.5}};
  const auto kept = sf::non_max_suppression(d, 0.5);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].score, 0.9);
  EXPECT_EQ(kept[1].box, (sf::BBox{20, 20, 30, 30}));
}

TEST(Detection, Validation) {
  EXPECT_THROW(sf::validate(sf::Detection{{0, 0, 1, 1}, 1.2}), sf::DomainError);
  EXPECT_THROW(sf::validate(sf::Detection{{2, 0, 1, 1}, 0.5}), sf::DomainError);
  EXPECT_NO_THROW(sf::validate(sf::Detection{{0, 0, 1, 1}, 0.5}));
}
