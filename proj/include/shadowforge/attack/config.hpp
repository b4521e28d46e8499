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

// Attack run configuration and its JSON form. Every field has a default, so
// a run file only lists what it changes.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shadowforge/diff/adam.hpp"
#include "shadowforge/geometry/primitives.hpp"
#include "shadowforge/losses/smoothness.hpp"
#include "shadowforge/objective/template_detector.hpp"
#include "shadowforge/scene/eot.hpp"
#include "shadowforge/scene/model.hpp"
#include "shadowforge/shadow/shadow.hpp"

namespace shadowforge {

struct Range {
  double lo = 0.0, hi = 0.0;
  bool operator==(const Range&) const = default;
};

// Softness tau(i) = initial * factor^(number of milestones <= i).
struct TauSchedule {
  double initial = 1.0;
  std::vector<int> milestones;
  double factor = 0.5;

  double at(int iteration) const {
    double tau = initial;
    for (int m : milestones)
      if (iteration >= m) tau *= factor;
    return tau;
  }
  bool operator==(const TauSchedule&) const = default;
};

struct LearningRates {
  double offsets = 0.02;
  double center = 0.5;
  double phi = 0.01;
  bool operator==(const LearningRates&) const = default;
};

struct AttackConfig {
  int num_patterns = 5;
  int iterations = 500;
  int batch_views = 4;
  std::uint64_t seed = 0;
  std::vector<std::string> regions = {"door", "roof", "hood", "rear"};  // cycled over patterns

  // Adversarial mesh: icosphere of radius initial_radius_ratio * sticker_radius
  // (model units); control offsets are clamped to offset_clamp_ratio * sticker_radius.
  double sticker_radius = 0.5;
  double initial_radius_ratio = 0.3;
  double offset_clamp_ratio = 0.4;
  int icosphere_subdivisions = 2;

  double sticker_gray = 0.15;
  int pattern_resolution = 128;
  double pattern_scale = 0.0;  // texels per model unit; 0 takes the model's texel density
  TauSchedule tau;

  EotBounds eot{0.005, 0.01, 0.2, 0.05, 2.0, 1};
  LossWeights weights;
  int cloud_points = 500;
  LearningRates lr;
  double beta1 = 0.9, beta2 = 0.999;

  Range dist{4.0, 8.0}, elev{0.0, 60.0}, azim{0.0, 360.0};
  double fov = 60.0;
  int width = 256, height = 256;
  std::vector<CameraParams> view_pool;  // when set, batches draw views from it
  std::filesystem::path background_dir;  // grayscale images; empty uses the model's constant level

  bool use_control_points = true;
  bool use_smoothness_losses = true;
  WindowAggregation aggregation = WindowAggregation::kSoftmax;
  int workers = 0;  // 0 = default_workers()

  double offset_clamp() const { return offset_clamp_ratio * sticker_radius; }
  LossWeights effective_weights() const { return use_smoothness_losses ? weights : LossWeights{0, 0, 0, 0}; }
};

inline void validate(const AttackConfig& c) {
  if (c.num_patterns < 1) throw DomainError("num_patterns must be >= 1");
  if (c.iterations < 0) throw DomainError("iterations must be >= 0");
  if (c.batch_views < 1) throw DomainError("batch_views must be >= 1");
  if (c.regions.empty()) throw DomainError("at least one paste region is required");
  if (!(c.sticker_radius > 0.0) || !(c.initial_radius_ratio > 0.0) || c.offset_clamp_ratio < 0.0)
    throw DomainError("sticker radius ratios must be positive");
  if (c.icosphere_subdivisions < 0 || c.icosphere_subdivisions > kMaxIcosphereSubdivisions)
    throw DomainError("icosphere subdivisions out of range");
  if (!(c.sticker_gray >= 0.0 && c.sticker_gray <= 1.0)) throw DomainError("sticker_gray must lie in [0,1]");
  if (c.pattern_resolution < 8) throw DomainError("pattern_resolution must be >= 8");
  if (c.pattern_scale < 0.0) throw DomainError("pattern_scale must be >= 0");
  if (!(c.tau.initial > 0.0) || !(c.tau.factor > 0.0)) throw DomainError("tau schedule must be positive");
  validate(c.eot);
  validate(c.weights);
  if (c.cloud_points < 1) throw DomainError("cloud_points must be >= 1");
  if (!(c.lr.offsets > 0.0 && c.lr.center > 0.0 && c.lr.phi > 0.0)) throw DomainError("learning rates must be positive");
  auto check_range = [](const Range& r, double lo, double hi, bool hi_open, const char* name) {
    if (!(r.lo <= r.hi && r.lo >= lo && (hi_open ? r.hi <= hi : r.hi <= hi)))
      throw DomainError(std::string("camera range out of bounds: ") + name);
  };
  check_range(c.dist, 1e-9, 1e9, false, "dist");
  check_range(c.elev, 0.0, 90.0, false, "elev");
  check_range(c.azim, 0.0, 360.0, true, "azim");
  validate(CameraParams{c.dist.lo, c.elev.lo, c.azim.lo, c.fov, c.width, c.height});
  for (const auto& v : c.view_pool) validate(v);
  if (c.workers < 0) throw DomainError("workers must be >= 0");
}

namespace detail {

inline nlohmann::json range_json(const Range& r) { return {r.lo, r.hi}; }

inline Range range_from(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace detail

inline nlohmann::json to_json(const AttackConfig& c) {
  nlohmann::json pool = nlohmann::json::array();
  for (const auto& v : c.view_pool) pool.push_back({{"azim", v.azim}, {"elev", v.elev}, {"dist", v.dist}});
  return {
      {"num_patterns", c.num_patterns},
      {"iterations", c.iterations},
      {"batch_views", c.batch_views},
      {"seed", c.seed},
      {"regions", c.regions},
      {"sticker_radius", c.sticker_radius},
      {"initial_radius_ratio", c.initial_radius_ratio},
      {"offset_clamp_ratio", c.offset_clamp_ratio},
      {"icosphere_subdivisions", c.icosphere_subdivisions},
      {"sticker_gray", c.sticker_gray},
      {"pattern_resolution", c.pattern_resolution},
      {"pattern_scale", c.pattern_scale},
      {"tau", {{"initial", c.tau.initial}, {"milestones", c.tau.milestones}, {"factor", c.tau.factor}}},
      {"eot",
       {{"vertex_sigma", c.eot.vertex_sigma},
        {"noise_density", c.eot.noise_density},
        {"noise_amplitude", c.eot.noise_amplitude},
        {"gray_delta", c.eot.gray_delta},
        {"pos_delta", c.eot.pos_delta}}},
      {"weights", {{"normal", c.weights.normal}, {"edge", c.weights.edge}, {"chamfer", c.weights.chamfer},
                   {"laplacian", c.weights.laplacian}}},
      {"cloud_points", c.cloud_points},
      {"lr", {{"offsets", c.lr.offsets}, {"center", c.lr.center}, {"phi", c.lr.phi}}},
      {"beta1", c.beta1},
      {"beta2", c.beta2},
      {"camera",
       {{"dist", detail::range_json(c.dist)},
        {"elev", detail::range_json(c.elev)},
        {"azim", detail::range_json(c.azim)},
        {"fov", c.fov},
        {"width", c.width},
        {"height", c.height}}},
      {"view_pool", pool},
      {"background_dir", c.background_dir.string()},
      {"use_control_points", c.use_control_points},
      {"use_smoothness_losses", c.use_smoothness_losses},
      {"aggregation", c.aggregation == WindowAggregation::kSoftmax ? "softmax" : "mean"},
      {"workers", c.workers},
  };
}

inline AttackConfig attack_config_from_json(const nlohmann::json& j) {
  AttackConfig c;
  try {
    c.num_patterns = j.value("num_patterns", c.num_patterns);
    c.iterations = j.value("iterations", c.iterations);
    c.batch_views = j.value("batch_views", c.batch_views);
    c.seed = j.value("seed", c.seed);
    c.regions = j.value("regions", c.regions);
    c.sticker_radius = j.value("sticker_radius", c.sticker_radius);
    c.initial_radius_ratio = j.value("initial_radius_ratio", c.initial_radius_ratio);
    c.offset_clamp_ratio = j.value("offset_clamp_ratio", c.offset_clamp_ratio);
    c.icosphere_subdivisions = j.value("icosphere_subdivisions", c.icosphere_subdivisions);
    c.sticker_gray = j.value("sticker_gray", c.sticker_gray);
    c.pattern_resolution = j.value("pattern_resolution", c.pattern_resolution);
    c.pattern_scale = j.value("pattern_scale", c.pattern_scale);
    if (j.contains("tau")) {
      const auto& t = j["tau"];
      c.tau.initial = t.value("initial", c.tau.initial);
      c.tau.milestones = t.value("milestones", c.tau.milestones);
      c.tau.factor = t.value("factor", c.tau.factor);
    }
    if (j.contains("eot")) {
      const auto& e = j["eot"];
      c.eot.vertex_sigma = e.value("vertex_sigma", c.eot.vertex_sigma);
      c.eot.noise_density = e.value("noise_density", c.eot.noise_density);
      c.eot.noise_amplitude = e.value("noise_amplitude", c.eot.noise_amplitude);
      c.eot.gray_delta = e.value("gray_delta", c.eot.gray_delta);
      c.eot.pos_delta = e.value("pos_delta", c.eot.pos_delta);
    }
    if (j.contains("weights")) {
      const auto& w = j["weights"];
      c.weights.normal = w.value("normal", c.weights.normal);
      c.weights.edge = w.value("edge", c.weights.edge);
      c.weights.chamfer = w.value("chamfer", c.weights.chamfer);
      c.weights.laplacian = w.value("laplacian", c.weights.laplacian);
    }
    c.cloud_points = j.value("cloud_points", c.cloud_points);
    if (j.contains("lr")) {
      const auto& l = j["lr"];
      c.lr.offsets = l.value("offsets", c.lr.offsets);
      c.lr.center = l.value("center", c.lr.center);
      c.lr.phi = l.value("phi", c.lr.phi);
    }
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    if (j.contains("camera")) {
      const auto& cam = j["camera"];
      if (cam.contains("dist")) c.dist = detail::range_from(cam["dist"]);
      if (cam.contains("elev")) c.elev = detail::range_from(cam["elev"]);
      if (cam.contains("azim")) c.azim = detail::range_from(cam["azim"]);
      c.fov = cam.value("fov", c.fov);
      c.width = cam.value("width", c.width);
      c.height = cam.value("height", c.height);
    }
    if (j.contains("view_pool"))
      for (const auto& v : j["view_pool"]) {
        CameraParams p;
        p.fov = c.fov;
        p.width = c.width;
        p.height = c.height;
        c.view_pool.push_back(camera_from_json(v, p));
      }
    c.background_dir = j.value("background_dir", std::string());
    c.use_control_points = j.value("use_control_points", c.use_control_points);
    c.use_smoothness_losses = j.value("use_smoothness_losses", c.use_smoothness_losses);
    const std::string agg = j.value("aggregation", std::string("softmax"));
    if (agg == "softmax") {
      c.aggregation = WindowAggregation::kSoftmax;
    } else if (agg == "mean") {
      c.aggregation = WindowAggregation::kMean;
    } else {
      throw DomainError("unknown aggregation '" + agg + "'");
    }
    c.workers = j.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("bad attack config: ") + e.what());
  }
  validate(c);
  return c;
}

inline AttackConfig load_attack_config(const std::filesystem::path& path) {
  AttackConfig c = attack_config_from_json(json_from_file(path));
  if (!c.background_dir.empty() && c.background_dir.is_relative()) c.background_dir = path.parent_path() / c.background_dir;
  return c;
}

}  // namespace shadowforge
