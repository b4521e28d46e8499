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

// Mesh-shadow attack loop. Per pattern i the variables are control offsets
// C_i (or raw vertex offsets with control points off), paste center P_i and
// shadowing angle phi_i. One view of a batch runs
//
//   offsets -> deformed mesh -> EOT vertex jitter -> shadow -> pattern noise
//     -> paste at jittered P -> render -> detector score at the GT box
//
// and the backward pass walks the same chain in reverse. Smoothness losses
// act on the unjittered meshes and reach only the offsets.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "shadowforge/attack/config.hpp"
#include "shadowforge/core/parallel.hpp"
#include "shadowforge/geometry/control_points.hpp"
#include "shadowforge/geometry/primitives.hpp"
#include "shadowforge/geometry/sampling.hpp"
#include "shadowforge/objective/detector.hpp"
#include "shadowforge/scene/paste.hpp"
#include "shadowforge/scene/render.hpp"

namespace shadowforge {

struct PatternState {
  std::vector<Vec3> offsets;
  Vec2 center;
  double phi = 0.0;
  bool operator==(const PatternState&) const = default;
};

struct LossRecord {
  double total = 0, det = 0, normal = 0, edge = 0, chamfer = 0, laplacian = 0;
  bool operator==(const LossRecord&) const = default;
};

struct AttackState {
  std::vector<PatternState> patterns;
  AdamState adam_offsets, adam_center, adam_phi;
  int iteration = 0;
  std::vector<LossRecord> history;
  std::vector<std::string> events;
  bool operator==(const AttackState&) const = default;
};

struct ViewSample {
  CameraParams camera;
  int pool_index = -1;
  EotSample eot;
};

struct ViewDiagnostics {
  CameraParams camera;
  double det = 0.0;
  bool has_object = false;
};

struct ForwardResult {
  LossRecord loss;
  std::vector<ViewDiagnostics> views;
  std::vector<std::string> warnings;
};

struct AttackGradient {
  std::vector<std::vector<Vec3>> offsets;
  std::vector<Vec2> center;
  std::vector<double> phi;
};

inline double wrap_angle(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(phi, two_pi);
  if (w < 0.0) w += two_pi;
  if (w >= two_pi) w = 0.0;
  return w;
}

class Attack {
 public:
  Attack(AttackConfig config, const CarModel& model, const Detector& detector)
      : config_(std::move(config)), model_(model), detector_(detector) {
    validate(config_);
    if (!detector_.differentiable()) throw CapabilityError("attack needs a white-box detector");
    validate_texture(model_.texture);
    sphere_ = make_icosphere(config_.icosphere_subdivisions, config_.initial_radius_ratio * config_.sticker_radius);
    if (config_.use_control_points) {
      controls_ = make_lattice_control_points(sphere_);
      basis_ = ControlPointBasis(sphere_.vertices, controls_.anchors, controls_.sigma);
    }
    scale_ = config_.pattern_scale > 0.0 ? config_.pattern_scale : model_.texels_per_meter;
    for (int i = 0; i < config_.num_patterns; ++i) {
      const std::string& name = config_.regions[i % config_.regions.size()];
      regions_.push_back({region(model_, name), name});
    }
    load_backgrounds();
    workers_ = config_.workers > 0 ? config_.workers : default_workers();
    for (const auto& v : config_.view_pool) pool_maps_.push_back(make_map(v));
  }

  const AttackConfig& config() const { return config_; }
  const TriMesh& sphere() const { return sphere_; }
  size_t offsets_per_pattern() const {
    return config_.use_control_points ? controls_.size() : sphere_.vertices.size();
  }
  const Rect& region_of(int i) const { return regions_[i].rect; }

  AttackState initial_state() const {
    AttackState s;
    // Patterns sharing a region start spread along its longer side.
    std::map<std::string, int> count, seen;
    for (const auto& r : regions_) ++count[r.name];
    for (int i = 0; i < config_.num_patterns; ++i) {
      const auto& r = regions_[i];
      const double f = (seen[r.name]++ + 1.0) / (count[r.name] + 1.0);
      const Rect& q = r.rect;
      Vec2 c = q.center();
      if (q.x1 - q.x0 >= q.y1 - q.y0) {
        c.x = q.x0 + f * (q.x1 - q.x0);
      } else {
        c.y = q.y0 + f * (q.y1 - q.y0);
      }
      s.patterns.push_back({std::vector<Vec3>(offsets_per_pattern()), c, 0.0});
    }
    const size_t n = config_.num_patterns;
    s.adam_offsets = AdamState(n * offsets_per_pattern() * 3);
    s.adam_center = AdamState(n * 2);
    s.adam_phi = AdamState(n);
    return s;
  }

  TriMesh adversarial_mesh(const PatternState& p) const {
    TriMesh m = sphere_;
    if (config_.use_control_points) {
      m.vertices = basis_.apply(p.offsets);
    } else {
      for (size_t k = 0; k < m.vertices.size(); ++k) m.vertices[k] += p.offsets[k];
    }
    return m;
  }

  ShadowParams shadow_params(const PatternState& p, int iteration) const {
    return {p.phi, config_.sticker_gray, config_.pattern_resolution, scale_, config_.tau.at(iteration)};
  }

  // Unperturbed patterns at the softness of `iteration`.
  std::vector<PatternRaster> patterns(const AttackState& s, int iteration) const {
    std::vector<PatternRaster> out;
    for (const auto& p : s.patterns) out.push_back(shadow_project(adversarial_mesh(p), shadow_params(p, iteration)).pattern);
    return out;
  }

  std::vector<PastePlacement> placements(const AttackState& s) const {
    std::vector<PastePlacement> out;
    for (size_t i = 0; i < s.patterns.size(); ++i)
      out.push_back({s.patterns[i].center, regions_[i].rect, regions_[i].name});
    return out;
  }

  PasteResult adversarial_texture(const AttackState& s) const {
    return paste_patterns(model_.texture, patterns(s, s.iteration), placements(s));
  }

  // Batch of views and EOT draws for an iteration; a pure function of
  // (seed, iteration).
  std::vector<ViewSample> sample_views(int iteration) const {
    Rng rng(derive_seed(config_.seed, {static_cast<std::uint64_t>(iteration), 1}));
    EotBounds bounds = config_.eot;
    bounds.background_count = std::max<int>(1, backgrounds_.size());
    std::vector<ViewSample> out;
    for (int b = 0; b < config_.batch_views; ++b) {
      ViewSample v;
      if (!config_.view_pool.empty()) {
        v.pool_index = std::min<int>(config_.view_pool.size() - 1, uniform01(rng) * config_.view_pool.size());
        v.camera = config_.view_pool[v.pool_index];
      } else {
        v.camera = {uniform(rng, config_.dist.lo, config_.dist.hi), uniform(rng, config_.elev.lo, config_.elev.hi),
                    uniform(rng, config_.azim.lo, config_.azim.hi), config_.fov, config_.width, config_.height};
        if (v.camera.azim >= 360.0) v.camera.azim = 0.0;
      }
      v.eot = eot_sample(bounds, config_.num_patterns,
                         derive_seed(config_.seed, {static_cast<std::uint64_t>(iteration), 2, static_cast<std::uint64_t>(b)}));
      out.push_back(std::move(v));
    }
    return out;
  }

  // Total loss over a batch; fills `grad` when non-null.
  ForwardResult forward(const AttackState& s, const std::vector<ViewSample>& views, int iteration,
                        AttackGradient* grad = nullptr) const {
    const size_t n = s.patterns.size();
    if (views.empty()) throw DomainError("forward needs at least one view");
    std::vector<TriMesh> meshes;
    for (const auto& p : s.patterns) meshes.push_back(adversarial_mesh(p));
    std::vector<std::vector<Vec3>> gverts(n, std::vector<Vec3>(sphere_.vertices.size()));

    ForwardResult r;
    const LossWeights w = config_.effective_weights();
    for (size_t i = 0; i < n; ++i) add_smoothness(meshes[i], w, iteration, i, r.loss, grad ? &gverts[i] : nullptr);

    struct ViewOut {
      ViewDiagnostics diag;
      std::vector<std::vector<Vec3>> gverts;
      std::vector<Vec2> gcenter;
      std::vector<double> gphi;
      std::vector<std::string> warnings;
    };
    std::vector<ViewOut> outs(views.size());
    parallel_for(static_cast<int>(views.size()), workers_, [&](int k) {
      outs[k] = {};
      run_view(s, meshes, views[k], iteration, grad != nullptr, outs[k].diag, outs[k].gverts, outs[k].gcenter,
               outs[k].gphi, outs[k].warnings);
    });

    int counted = 0;
    for (const auto& o : outs)
      if (o.diag.has_object) ++counted;
    if (grad) {
      grad->offsets.assign(n, {});
      grad->center.assign(n, Vec2{});
      grad->phi.assign(n, 0.0);
    }
    std::set<std::string> seen;
    for (const auto& o : outs) {  // fixed view order
      r.views.push_back(o.diag);
      for (const auto& msg : o.warnings)
        if (seen.insert(msg).second) r.warnings.push_back(msg);
      if (!o.diag.has_object) continue;
      const double inv = 1.0 / counted;
      r.loss.det += o.diag.det * inv;
      if (!grad) continue;
      for (size_t i = 0; i < n; ++i) {
        for (size_t v = 0; v < gverts[i].size(); ++v) gverts[i][v] += inv * o.gverts[i][v];
        grad->center[i] += inv * o.gcenter[i];
        grad->phi[i] += inv * o.gphi[i];
      }
    }
    r.loss.total = combine(r.loss.det, r.loss.normal, r.loss.edge, r.loss.chamfer, r.loss.laplacian, LossWeights{1, 1, 1, 1});
    if (grad)
      for (size_t i = 0; i < n; ++i) grad->offsets[i] = config_.use_control_points ? basis_.vjp(gverts[i]) : gverts[i];
    return r;
  }

  // One optimization step at s.iteration.
  ForwardResult step(AttackState& s) const {
    const int it = s.iteration;
    AttackGradient g;
    ForwardResult r = forward(s, sample_views(it), it, &g);
    if (!std::isfinite(r.loss.total))
      throw DomainError("non-finite loss at iteration " + std::to_string(it) + ": " + describe(r.loss));
    if (!gradient_finite(g)) {
      s.events.push_back("iteration " + std::to_string(it) + ": non-finite gradient, step skipped");
    } else {
      apply_update(s, g);
    }
    s.history.push_back(r.loss);
    ++s.iteration;
    return r;
  }

  // Adam per parameter group followed by the feasibility projections.
  void apply_update(AttackState& s, const AttackGradient& g) const {
    const size_t n = s.patterns.size();
    std::vector<double> po, go, pc, gc, pp, gp;
    for (size_t i = 0; i < n; ++i) {
      for (size_t k = 0; k < s.patterns[i].offsets.size(); ++k)
        for (int a = 0; a < 3; ++a) {
          po.push_back(s.patterns[i].offsets[k][a]);
          go.push_back(g.offsets[i][k][a]);
        }
      pc.insert(pc.end(), {s.patterns[i].center.x, s.patterns[i].center.y});
      gc.insert(gc.end(), {g.center[i].x, g.center[i].y});
      pp.push_back(s.patterns[i].phi);
      gp.push_back(g.phi[i]);
    }
    adam_step(po, go, s.adam_offsets, {config_.lr.offsets, config_.beta1, config_.beta2});
    adam_step(pc, gc, s.adam_center, {config_.lr.center, config_.beta1, config_.beta2});
    adam_step(pp, gp, s.adam_phi, {config_.lr.phi, config_.beta1, config_.beta2});
    size_t o = 0;
    const double cap = config_.offset_clamp();
    for (size_t i = 0; i < n; ++i) {
      auto& p = s.patterns[i];
      for (auto& off : p.offsets) {
        off = {po[o], po[o + 1], po[o + 2]};
        o += 3;
        const double len = norm(off);
        if (len > cap) off *= cap / len;
      }
      p.center = regions_[i].rect.clamp({pc[2 * i], pc[2 * i + 1]});
      p.phi = wrap_angle(pp[i]);
    }
  }

  // Mean detector score over the view pool for a texture, no EOT.
  double pool_confidence(const TextureMap& texture) const {
    if (config_.view_pool.empty()) throw DomainError("config has no view pool");
    double sum = 0.0;
    int counted = 0;
    for (size_t k = 0; k < pool_maps_.size(); ++k) {
      const auto gt = silhouette_bbox(pool_maps_[k].mask, pool_maps_[k].width, pool_maps_[k].height);
      if (!gt || !gt->valid()) continue;
      const auto img = shade(pool_maps_[k], texture, background_image(0, config_.view_pool[k]));
      sum += detection_loss(detector_, img.gray, *gt);
      ++counted;
    }
    if (counted == 0) throw DomainError("no pool view shows the car");
    return sum / counted;
  }

  static std::string describe(const LossRecord& l) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "total=%g det=%g normal=%g edge=%g chamfer=%g laplacian=%g", l.total, l.det, l.normal,
                  l.edge, l.chamfer, l.laplacian);
    return buf;
  }

 private:
  struct NamedRegion {
    Rect rect;
    std::string name;
  };

  RenderMap make_map(const CameraParams& cam) const {
    return rasterize(model_.mesh, camera_matrix(cam, centroid(model_.mesh.vertices)), model_.texture.width,
                     model_.texture.height);
  }

  void load_backgrounds() {
    if (config_.background_dir.empty()) return;
    if (!std::filesystem::is_directory(config_.background_dir))
      throw AssetError("asset not found: background directory " + config_.background_dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(config_.background_dir)) {
      const auto ext = e.path().extension().string();
      if (ext == ".png" || ext == ".pgm" || ext == ".PNG" || ext == ".PGM") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw AssetError("background directory has no images: " + config_.background_dir.string());
    for (const auto& f : files) backgrounds_.push_back(read_image(f));
  }

  Image background_image(int id, const CameraParams& cam) const {
    if (backgrounds_.empty()) return model_.background.resolve(cam.width, cam.height);
    return resize_bilinear(backgrounds_[id], cam.width, cam.height);
  }

  void add_smoothness(const TriMesh& mesh, const LossWeights& w, int iteration, size_t pattern, LossRecord& loss,
                      std::vector<Vec3>* gv) const {
    std::vector<Vec3> g;
    auto accumulate = [&](double weight, double value, double& slot) {
      slot += weight * value;
      if (gv)
        for (size_t k = 0; k < g.size(); ++k) (*gv)[k] += weight * g[k];
    };
    if (w.normal > 0) accumulate(w.normal, normal_consistency(mesh, gv ? &g : nullptr), loss.normal);
    if (w.edge > 0) accumulate(w.edge, edge_length_mean(mesh, gv ? &g : nullptr), loss.edge);
    if (w.laplacian > 0) accumulate(w.laplacian, laplacian_smoothing(mesh, gv ? &g : nullptr), loss.laplacian);
    if (w.chamfer > 0) {
      const auto it = static_cast<std::uint64_t>(iteration);
      const auto adv = surface_sample(mesh, config_.cloud_points, derive_seed(config_.seed, {it, 3, pattern}));
      const auto ref = surface_sample(sphere_, config_.cloud_points, derive_seed(config_.seed, {it, 4, pattern}));
      std::vector<Vec3> gp;
      const double c = chamfer(adv, ref, gv ? &gp : nullptr, nullptr);
      if (gv) g = surface_sample_vjp(mesh, adv.provenance, gp);
      accumulate(w.chamfer, c, loss.chamfer);
    }
  }

  void run_view(const AttackState& s, const std::vector<TriMesh>& meshes, const ViewSample& view, int iteration,
                bool want_grad, ViewDiagnostics& diag, std::vector<std::vector<Vec3>>& gverts,
                std::vector<Vec2>& gcenter, std::vector<double>& gphi, std::vector<std::string>& warnings) const {
    const size_t n = s.patterns.size();
    diag.camera = view.camera;
    std::optional<RenderMap> local;
    const RenderMap& map = view.pool_index >= 0 ? pool_maps_[view.pool_index] : local.emplace(make_map(view.camera));
    const auto gt = silhouette_bbox(map.mask, map.width, map.height);
    if (!gt || !gt->valid()) {
      warnings.push_back("view without visible car skipped");
      return;
    }
    diag.has_object = true;

    std::vector<TriMesh> jittered;
    std::vector<ShadowResult> shadows;
    std::vector<NoisyAlpha> noisy;
    std::vector<PatternRaster> rasters;
    std::vector<PastePlacement> places;
    for (size_t i = 0; i < n; ++i) {
      const auto& p = s.patterns[i];
      jittered.push_back(vertex_jitter(meshes[i], view.eot.vertex_sigma, view.eot.jitter_seeds[i]));
      const ShadowParams sp = shadow_params(p, iteration);
      shadows.push_back(shadow_project(jittered.back(), sp));
      for (const auto& msg : shadows.back().projection.warnings) warnings.push_back(msg);
      noisy.push_back(apply_pattern_noise(shadows.back().pattern.alpha, view.eot.noise_density,
                                          view.eot.noise_amplitude, view.eot.noise_seeds[i]));
      rasters.push_back({noisy.back().alpha, std::clamp(sp.gray + view.eot.gray_delta[i], 0.0, 1.0)});
      places.push_back({p.center + view.eot.pos_delta[i], regions_[i].rect, regions_[i].name});
    }
    const PasteResult pasted = paste_patterns(model_.texture, rasters, places);
    for (const auto& msg : pasted.warnings) warnings.push_back(msg);
    const Image bg = background_image(view.eot.background_id, view.camera);
    const RenderedImage img = shade(map, pasted.texture, bg);
    Image gimg;
    diag.det = detection_loss(detector_, img.gray, *gt, want_grad ? &gimg : nullptr);
    if (!want_grad) return;

    const Image gtex = shade_vjp(map, gimg);
    const PasteGradient pg = paste_patterns_vjp(rasters, places, pasted, gtex);
    gverts.resize(n);
    gcenter.resize(n);
    gphi.resize(n);
    for (size_t i = 0; i < n; ++i) {
      Image ga = pg.alpha[i];
      for (size_t k = 0; k < ga.size(); ++k) ga.data[k] *= noisy[i].pass.data[k];
      const ShadowGradient sg = shadow_project_vjp(jittered[i], shadow_params(s.patterns[i], iteration), shadows[i], ga);
      gverts[i] = sg.vertices;  // jitter is additive
      gphi[i] = sg.phi;
      gcenter[i] = pg.center[i];
    }
  }

  static bool gradient_finite(const AttackGradient& g) {
    for (const auto& o : g.offsets)
      for (const auto& v : o)
        if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) return false;
    for (const auto& c : g.center)
      if (!std::isfinite(c.x) || !std::isfinite(c.y)) return false;
    for (double p : g.phi)
      if (!std::isfinite(p)) return false;
    return true;
  }

  AttackConfig config_;
  const CarModel& model_;
  const Detector& detector_;
  TriMesh sphere_;
  ControlPointSet controls_;
  ControlPointBasis basis_;
  double scale_ = 1.0;
  std::vector<NamedRegion> regions_;
  std::vector<Image> backgrounds_;
  std::vector<RenderMap> pool_maps_;
  int workers_ = 1;
};

}  // namespace shadowforge
