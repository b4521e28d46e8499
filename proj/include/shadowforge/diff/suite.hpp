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

// Registry of finite-difference checks covering every differentiable stage
// of the attack, a few two-stage compositions and the full objective. Each
// entry builds its operation and a randomized small input from a seed.

#include <algorithm>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "shadowforge/attack/attack.hpp"
#include "shadowforge/diff/gradcheck.hpp"
#include "shadowforge/objective/template_detector.hpp"
#include "shadowforge/scene/synthetic.hpp"

namespace shadowforge {

struct GradCase {
  DiffOp op;
  FlatVector x;
};

struct GradSuiteEntry {
  std::string name;
  std::string module;
  double eps = 1e-6;
  double tol = 1e-4;
  std::function<GradCase(std::uint64_t seed)> build;
};

namespace suite_detail {

inline std::vector<double> to_flat(const Image& img) { return img.data; }

inline Image to_image(const FlatVector& x, size_t begin, int w, int h) {
  Image img(w, h);
  std::copy(x.begin() + static_cast<std::ptrdiff_t>(begin), x.begin() + static_cast<std::ptrdiff_t>(begin + img.size()),
            img.data.begin());
  return img;
}

inline std::vector<Vec3> slice_vec3(const FlatVector& x, size_t begin, size_t count) {
  return unflatten(FlatVector(x.begin() + static_cast<std::ptrdiff_t>(begin),
                              x.begin() + static_cast<std::ptrdiff_t>(begin + 3 * count)));
}

inline TriMesh perturbed_sphere(int subdivisions, double radius, double noise, std::uint64_t seed) {
  TriMesh m = make_icosphere(subdivisions, radius);
  Rng rng(seed);
  for (auto& v : m.vertices) v += noise * Vec3{standard_normal(rng), standard_normal(rng), standard_normal(rng)};
  return m;
}

inline TriMesh with_vertices(TriMesh m, const FlatVector& x, size_t begin = 0) {
  m.vertices = slice_vec3(x, begin, m.vertices.size());
  return m;
}

constexpr int kShadowRes = 32;
constexpr double kShadowScale = 60.0;
constexpr double kShadowTau = 1.0;

// Excludes pixels farther than 8 tau from every face edge, where coverage
// is saturated and its derivative is numerically flat.
inline FlatVector shadow_mask(const TriMesh& mesh, double phi) {
  const auto proj = project_vertices(mesh, phi, kShadowScale, kShadowRes);
  Image near(kShadowRes, kShadowRes);
  detail::for_each_face_pixel(proj.points, mesh.faces, kShadowRes, kShadowTau,
                              [&](size_t, int x, int y, const detail::SignedDistance& sd) {
                                if (std::abs(sd.d) <= 8.0 * kShadowTau) near.at(x, y) = 1.0;
                              });
  return near.data;
}

// Vertices + phi -> soft coverage raster.
inline DiffOp shadow_op(const TriMesh& base) {
  const size_t nv = base.vertices.size();
  const auto unpack = [base, nv](const FlatVector& x) {
    return std::pair{with_vertices(base, x), ShadowParams{x[3 * nv], 0.15, kShadowRes, kShadowScale, kShadowTau}};
  };
  DiffOp op;
  op.name = "shadow";
  op.forward = [unpack](const FlatVector& x) {
    const auto [m, p] = unpack(x);
    return to_flat(shadow_project(m, p).pattern.alpha);
  };
  op.vjp = [unpack](const FlatVector& x, const FlatVector& u) {
    const auto [m, p] = unpack(x);
    const auto fwd = shadow_project(m, p);
    const auto g = shadow_project_vjp(m, p, fwd, to_image(u, 0, kShadowRes, kShadowRes));
    FlatVector out = flatten(g.vertices);
    out.push_back(g.phi);
    return out;
  };
  op.cotangent_mask = [unpack](const FlatVector& x) {
    const auto [m, p] = unpack(x);
    return shadow_mask(m, p.phi);
  };
  op.groups = {{"vertices", 0, 3 * nv}, {"phi", 3 * nv, 3 * nv + 1}};
  return op;
}

// Two patterns pasted into a textured 48 x 40 canvas; inputs are both alpha
// rasters, both grays and both centers.
struct PasteScene {
  static constexpr int kRes = 12, kW = 48, kH = 40;
  Image origin{kW, kH};
  std::vector<Rect> regions{{2, 3, 30, 30}, {14, 8, 46, 38}};

  static size_t alpha_size() { return 2 * kRes * kRes; }
  static size_t size() { return alpha_size() + 2 + 4; }

  std::pair<std::vector<PatternRaster>, std::vector<PastePlacement>> unpack(const FlatVector& x) const {
    std::vector<PatternRaster> pats;
    std::vector<PastePlacement> places;
    for (int k = 0; k < 2; ++k) {
      pats.push_back({to_image(x, k * kRes * kRes, kRes, kRes), x[alpha_size() + k]});
      places.push_back({{x[alpha_size() + 2 + 2 * k], x[alpha_size() + 3 + 2 * k]}, regions[k], "r" + std::to_string(k)});
    }
    return {pats, places};
  }
};

inline PasteScene make_paste_scene(std::uint64_t seed, FlatVector& x) {
  PasteScene s;
  Rng rng(seed);
  for (double& v : s.origin.data) v = uniform(rng, 0.2, 0.8);
  x.assign(PasteScene::size(), 0.0);
  for (size_t i = 0; i < PasteScene::alpha_size(); ++i) x[i] = uniform(rng, 0.05, 0.95);
  x[PasteScene::alpha_size()] = uniform(rng, 0.1, 0.3);
  x[PasteScene::alpha_size() + 1] = uniform(rng, 0.6, 0.9);
  // Non-integer centers keep the bilinear lookup away from its kinks.
  x[PasteScene::alpha_size() + 2] = 14.0 + uniform(rng, 0.1, 0.4);
  x[PasteScene::alpha_size() + 3] = 15.0 + uniform(rng, 0.1, 0.4);
  x[PasteScene::alpha_size() + 4] = 26.0 + uniform(rng, 0.1, 0.4);
  x[PasteScene::alpha_size() + 5] = 21.0 + uniform(rng, 0.1, 0.4);
  return s;
}

inline std::vector<InputGroup> paste_groups() {
  const size_t a = PasteScene::alpha_size();
  return {{"alpha", 0, a}, {"gray", a, a + 2}, {"center", a + 2, a + 6}};
}

inline FlatVector paste_vjp_flat(const PasteGradient& g) {
  FlatVector out;
  for (const auto& a : g.alpha) out.insert(out.end(), a.data.begin(), a.data.end());
  for (double v : g.gray) out.push_back(v);
  for (const auto& c : g.center) {
    out.push_back(c.x);
    out.push_back(c.y);
  }
  return out;
}

// Scene shared by the render, detector and full-objective checks.
struct BoxScene {
  CarModel model = make_box_model();
  TemplateDetector detector = build_template_detector(model.mesh, model.texture, model.calibration_view, model.background);
  RenderMap map = rasterize(model.mesh, camera_matrix(model.calibration_view, centroid(model.mesh.vertices)),
                            model.texture.width, model.texture.height);
  Image background = model.background.resolve(model.calibration_view.width, model.calibration_view.height);
  BBox gt = *silhouette_bbox(map.mask, map.width, map.height);
};

inline std::shared_ptr<const BoxScene> box_scene() {
  static const auto scene = std::make_shared<const BoxScene>();
  return scene;
}

inline FlatVector noisy_texture(const Image& t, std::uint64_t seed) {
  Rng rng(seed);
  FlatVector x = t.data;
  for (double& v : x) v = std::clamp(v + uniform(rng, -0.1, 0.1), 0.0, 1.0);
  return x;
}

// Restricts a pixel-input op to base + B a for a random dense basis B. The
// detector gradient is small and spread over thousands of pixels, so random
// unit directions in pixel space fall below the absolute error floor; every
// basis direction moves all pixels at once.
inline GradCase in_image_basis(DiffOp op, const FlatVector& base, std::uint64_t seed, size_t dims = 8) {
  Rng rng(seed + 1000);
  auto basis = std::make_shared<std::vector<FlatVector>>(dims, FlatVector(base.size()));
  for (auto& b : *basis)
    for (double& v : b) v = 0.05 * standard_normal(rng);
  auto lift = [base, basis](const FlatVector& a) {
    FlatVector x = base;
    for (size_t k = 0; k < basis->size(); ++k)
      for (size_t i = 0; i < x.size(); ++i) x[i] += a[k] * (*basis)[k][i];
    return x;
  };
  DiffOp wrapped;
  wrapped.name = op.name;
  wrapped.forward = [fwd = op.forward, lift](const FlatVector& a) { return fwd(lift(a)); };
  wrapped.vjp = [vjp = op.vjp, lift, basis](const FlatVector& a, const FlatVector& u) {
    const FlatVector g = vjp(lift(a), u);
    FlatVector out(basis->size(), 0.0);
    for (size_t k = 0; k < basis->size(); ++k)
      for (size_t i = 0; i < g.size(); ++i) out[k] += (*basis)[k][i] * g[i];
    return out;
  };
  return GradCase{wrapped, FlatVector(dims, 0.0)};
}

// Attack objective on the box scene with EOT off: offsets, centers, phis.
struct ObjectiveScene {
  std::shared_ptr<const BoxScene> box = box_scene();
  std::unique_ptr<Attack> attack;
  AttackState state;
  size_t per_pattern = 0, n = 0;
  std::vector<ViewSample> views;

  AttackState unpack(const FlatVector& x) const {
    AttackState s = state;
    for (size_t i = 0; i < n; ++i) {
      s.patterns[i].offsets = slice_vec3(x, 3 * per_pattern * i, per_pattern);
      s.patterns[i].center = {x[3 * per_pattern * n + 2 * i], x[3 * per_pattern * n + 2 * i + 1]};
      s.patterns[i].phi = x[3 * per_pattern * n + 2 * n + i];
    }
    return s;
  }
};

inline AttackConfig objective_config() {
  AttackConfig c;
  c.num_patterns = 2;
  c.regions = {"side", "top"};
  c.batch_views = 2;
  c.icosphere_subdivisions = 1;
  c.pattern_resolution = 24;
  c.pattern_scale = 60.0;
  c.tau = {1.0, {}, 1.0};
  c.eot = {0.0, 0.0, 0.0, 0.0, 0.0, 1};
  c.cloud_points = 60;
  c.weights = {0.5, 1.0, 1.0, 0.3};
  c.width = c.height = 64;
  c.view_pool = {{5.0, 20.0, 60.0, 60.0, 64, 64}, {5.0, 40.0, 120.0, 60.0, 64, 64}};
  c.workers = 1;
  return c;
}

inline std::shared_ptr<ObjectiveScene> make_objective_scene(std::uint64_t seed, FlatVector& x) {
  auto sc = std::make_shared<ObjectiveScene>();
  sc->attack = std::make_unique<Attack>(objective_config(), sc->box->model, sc->box->detector);
  sc->state = sc->attack->initial_state();
  sc->per_pattern = sc->attack->offsets_per_pattern();
  sc->n = sc->state.patterns.size();
  sc->views = sc->attack->sample_views(0);
  Rng rng(seed);
  x.clear();
  for (size_t i = 0; i < sc->n * sc->per_pattern * 3; ++i) x.push_back(0.03 * standard_normal(rng));
  for (const auto& p : sc->state.patterns) {
    x.push_back(p.center.x + uniform(rng, 0.1, 0.4));
    x.push_back(p.center.y + uniform(rng, 0.1, 0.4));
  }
  for (size_t i = 0; i < sc->n; ++i) x.push_back(uniform(rng, -0.5, 0.5));
  return sc;
}

}  // namespace suite_detail

inline std::vector<GradSuiteEntry> gradient_suite() {
  using namespace suite_detail;
  std::vector<GradSuiteEntry> s;

  s.push_back({"control_points", "geometry", 1e-6, 1e-4, [](std::uint64_t seed) {
                 const TriMesh sphere = make_icosphere(1, 0.3);
                 const ControlPointSet cps = make_lattice_control_points(sphere);
                 const auto basis = std::make_shared<ControlPointBasis>(sphere.vertices, cps.anchors, cps.sigma);
                 DiffOp op;
                 op.name = "control_points";
                 op.forward = [basis](const FlatVector& x) { return flatten(basis->apply(unflatten(x))); };
                 op.vjp = [basis](const FlatVector&, const FlatVector& u) { return flatten(basis->vjp(unflatten(u))); };
                 Rng rng(seed);
                 FlatVector x(3 * cps.size());
                 for (double& v : x) v = 0.05 * standard_normal(rng);
                 return GradCase{op, x};
               }});

  s.push_back({"shadow", "shadow", 1e-6, 1e-3, [](std::uint64_t seed) {
                 const TriMesh m = perturbed_sphere(1, 0.15, 0.01, seed);
                 FlatVector x = flatten(m.vertices);
                 Rng rng(seed + 100);
                 x.push_back(uniform(rng, -1.0, 1.0));
                 return GradCase{shadow_op(m), x};
               }});

  s.push_back({"paste", "scene", 1e-6, 1e-4, [](std::uint64_t seed) {
                 FlatVector x;
                 const auto scene = std::make_shared<PasteScene>(make_paste_scene(seed, x));
                 DiffOp op;
                 op.name = "paste";
                 op.forward = [scene](const FlatVector& x) {
                   const auto [p, pl] = scene->unpack(x);
                   return to_flat(paste_patterns(scene->origin, p, pl).texture);
                 };
                 op.vjp = [scene](const FlatVector& x, const FlatVector& u) {
                   const auto [p, pl] = scene->unpack(x);
                   const auto fwd = paste_patterns(scene->origin, p, pl);
                   return paste_vjp_flat(paste_patterns_vjp(p, pl, fwd, to_image(u, 0, PasteScene::kW, PasteScene::kH)));
                 };
                 op.groups = paste_groups();
                 return GradCase{op, x};
               }});

  s.push_back({"render", "scene", 1e-6, 1e-4, [](std::uint64_t seed) {
                 const auto box = box_scene();
                 DiffOp op;
                 op.name = "render";
                 const int tw = box->model.texture.width, th = box->model.texture.height;
                 op.forward = [box, tw, th](const FlatVector& x) {
                   return to_flat(shade(box->map, to_image(x, 0, tw, th), box->background).gray);
                 };
                 op.vjp = [box](const FlatVector&, const FlatVector& u) {
                   return to_flat(shade_vjp(box->map, to_image(u, 0, box->map.width, box->map.height)));
                 };
                 return GradCase{op, noisy_texture(box->model.texture, seed)};
               }});

  using MeshLoss = double (*)(const TriMesh&, std::vector<Vec3>*);
  const std::pair<const char*, MeshLoss> mesh_losses[] = {{"normal_consistency", &normal_consistency},
                                                          {"edge_length", &edge_length_mean},
                                                          {"laplacian", &laplacian_smoothing}};
  for (const auto& [name, fn] : mesh_losses) {
    s.push_back({name, "losses", 1e-6, 1e-4, [name = std::string(name), fn = fn](std::uint64_t seed) {
                   const TriMesh base = perturbed_sphere(1, 1.0, 0.05, seed);
                   DiffOp op;
                   op.name = name;
                   op.forward = [base, fn](const FlatVector& x) { return FlatVector{fn(with_vertices(base, x), nullptr)}; };
                   op.vjp = [base, fn](const FlatVector& x, const FlatVector& u) {
                     std::vector<Vec3> g;
                     fn(with_vertices(base, x), &g);
                     FlatVector out = flatten(g);
                     for (double& v : out) v *= u[0];
                     return out;
                   };
                   return GradCase{op, flatten(base.vertices)};
                 }});
  }

  s.push_back({"chamfer", "losses", 1e-6, 1e-4, [](std::uint64_t seed) {
                 Rng rng(seed);
                 constexpr size_t n1 = 40, n2 = 55;
                 FlatVector x;
                 for (size_t i = 0; i < 3 * (n1 + n2); ++i) x.push_back(standard_normal(rng));
                 DiffOp op;
                 op.name = "chamfer";
                 op.forward = [](const FlatVector& x) {
                   return FlatVector{chamfer(slice_vec3(x, 0, n1), slice_vec3(x, 3 * n1, n2))};
                 };
                 op.vjp = [](const FlatVector& x, const FlatVector& u) {
                   std::vector<Vec3> g1, g2;
                   chamfer(slice_vec3(x, 0, n1), slice_vec3(x, 3 * n1, n2), &g1, &g2);
                   FlatVector out = flatten(g1), b = flatten(g2);
                   out.insert(out.end(), b.begin(), b.end());
                   for (double& v : out) v *= u[0];
                   return out;
                 };
                 op.groups = {{"first", 0, 3 * n1}, {"second", 3 * n1, 3 * (n1 + n2)}};
                 return GradCase{op, x};
               }});

  s.push_back({"detector_score", "objective", 1e-6, 1e-3, [](std::uint64_t seed) {
                 const auto box = box_scene();
                 const int w = box->map.width, h = box->map.height;
                 DiffOp op;
                 op.name = "detector_score";
                 op.forward = [box, w, h](const FlatVector& x) {
                   return FlatVector{box->detector.score(to_image(x, 0, w, h), box->gt, nullptr)};
                 };
                 op.vjp = [box, w, h](const FlatVector& x, const FlatVector& u) {
                   Image g;
                   box->detector.score(to_image(x, 0, w, h), box->gt, &g);
                   for (double& v : g.data) v *= u[0];
                   return g.data;
                 };
                 const Image clean = shade(box->map, box->model.texture, box->background).gray;
                 return in_image_basis(op, noisy_texture(clean, seed), seed);
               }});

  s.push_back({"total_loss", "attack", 1e-6, 1e-3, [](std::uint64_t seed) {
                 FlatVector x;
                 const auto sc = make_objective_scene(seed, x);
                 const size_t no = 3 * sc->per_pattern * sc->n;
                 DiffOp op;
                 op.name = "total_loss";
                 op.forward = [sc](const FlatVector& x) {
                   return FlatVector{sc->attack->forward(sc->unpack(x), sc->views, 0).loss.total};
                 };
                 op.vjp = [sc](const FlatVector& x, const FlatVector& u) {
                   AttackGradient g;
                   sc->attack->forward(sc->unpack(x), sc->views, 0, &g);
                   FlatVector out;
                   for (const auto& o : g.offsets) {
                     const auto f = flatten(o);
                     out.insert(out.end(), f.begin(), f.end());
                   }
                   for (const auto& c : g.center) {
                     out.push_back(c.x);
                     out.push_back(c.y);
                   }
                   out.insert(out.end(), g.phi.begin(), g.phi.end());
                   for (double& v : out) v *= u[0];
                   return out;
                 };
                 op.groups = {{"offsets", 0, no}, {"center", no, no + 2 * sc->n}, {"phi", no + 2 * sc->n, no + 3 * sc->n}};
                 return GradCase{op, x};
               }});

  // Compositions: chained VJPs against differences of the composed forward.
  s.push_back({"shadow_after_control_points", "composition", 1e-6, 1e-3, [](std::uint64_t seed) {
                 const TriMesh sphere = make_icosphere(1, 0.15);
                 const ControlPointSet cps = make_lattice_control_points(sphere);
                 const auto basis = std::make_shared<ControlPointBasis>(sphere.vertices, cps.anchors, cps.sigma);
                 const DiffOp inner = shadow_op(sphere);
                 const size_t na = 3 * cps.size();
                 const auto lift = [basis, na](const FlatVector& x) {
                   FlatVector v = flatten(basis->apply(unflatten(FlatVector(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(na)))));
                   v.push_back(x[na]);
                   return v;
                 };
                 DiffOp op;
                 op.name = "shadow_after_control_points";
                 op.forward = [inner, lift](const FlatVector& x) { return inner.forward(lift(x)); };
                 op.vjp = [inner, lift, basis](const FlatVector& x, const FlatVector& u) {
                   const FlatVector gv = inner.vjp(lift(x), u);
                   FlatVector out = flatten(basis->vjp(unflatten(FlatVector(gv.begin(), gv.end() - 1))));
                   out.push_back(gv.back());
                   return out;
                 };
                 op.cotangent_mask = [inner, lift](const FlatVector& x) { return inner.cotangent_mask(lift(x)); };
                 op.groups = {{"offsets", 0, na}, {"phi", na, na + 1}};
                 Rng rng(seed);
                 FlatVector x(na);
                 for (double& v : x) v = 0.02 * standard_normal(rng);
                 x.push_back(uniform(rng, -1.0, 1.0));
                 return GradCase{op, x};
               }});

  s.push_back({"render_after_paste", "composition", 1e-6, 1e-3, [](std::uint64_t seed) {
                 const auto box = box_scene();
                 // Paste the two patterns into the box texture instead of the random canvas.
                 FlatVector x;
                 auto scene = std::make_shared<PasteScene>(make_paste_scene(seed, x));
                 scene->origin = box->model.texture;
                 scene->regions = {{0, 0, 32, 32}, {32, 32, 64, 64}};
                 const size_t a = PasteScene::alpha_size();
                 x[a + 2] = 16.0 + (x[a + 2] - 14.0);
                 x[a + 3] = 16.0 + (x[a + 3] - 15.0);
                 x[a + 4] = 48.0 + (x[a + 4] - 26.0);
                 x[a + 5] = 48.0 + (x[a + 5] - 21.0);
                 DiffOp op;
                 op.name = "render_after_paste";
                 op.forward = [scene, box](const FlatVector& x) {
                   const auto [p, pl] = scene->unpack(x);
                   return to_flat(shade(box->map, paste_patterns(scene->origin, p, pl).texture, box->background).gray);
                 };
                 op.vjp = [scene, box](const FlatVector& x, const FlatVector& u) {
                   const auto [p, pl] = scene->unpack(x);
                   const auto fwd = paste_patterns(scene->origin, p, pl);
                   const Image gt = shade_vjp(box->map, to_image(u, 0, box->map.width, box->map.height));
                   return paste_vjp_flat(paste_patterns_vjp(p, pl, fwd, gt));
                 };
                 op.groups = paste_groups();
                 return GradCase{op, x};
               }});

  s.push_back({"score_after_render", "composition", 1e-6, 1e-3, [](std::uint64_t seed) {
                 const auto box = box_scene();
                 const int tw = box->model.texture.width, th = box->model.texture.height;
                 DiffOp op;
                 op.name = "score_after_render";
                 op.forward = [box, tw, th](const FlatVector& x) {
                   const Image img = shade(box->map, to_image(x, 0, tw, th), box->background).gray;
                   return FlatVector{box->detector.score(img, box->gt, nullptr)};
                 };
                 op.vjp = [box, tw, th](const FlatVector& x, const FlatVector& u) {
                   const Image img = shade(box->map, to_image(x, 0, tw, th), box->background).gray;
                   Image g;
                   box->detector.score(img, box->gt, &g);
                   FlatVector out = shade_vjp(box->map, g).data;
                   for (double& v : out) v *= u[0];
                   return out;
                 };
                 return in_image_basis(op, noisy_texture(box->model.texture, seed), seed);
               }});
  return s;
}

// Test hook: the same operation with its VJP negated.
inline DiffOp sign_flipped(DiffOp op) {
  auto vjp = op.vjp;
  op.vjp = [vjp](const FlatVector& x, const FlatVector& u) {
    FlatVector g = vjp(x, u);
    for (double& v : g) v = -v;
    return g;
  };
  return op;
}

struct GradSuiteRow {
  std::string name, module;
  std::uint64_t seed = 0;
  GradCheckReport report;
};

inline std::vector<std::string> gradient_suite_modules() {
  std::vector<std::string> out;
  for (const auto& e : gradient_suite())
    if (std::find(out.begin(), out.end(), e.module) == out.end()) out.push_back(e.module);
  return out;
}

// `selection` is "all", a module name or an entry name. Throws DomainError
// when it matches nothing.
inline std::vector<GradSuiteRow> run_gradient_suite(const std::string& selection,
                                                    const std::vector<std::uint64_t>& seeds = {1, 2, 3},
                                                    const std::string& sign_flip = "") {
  std::vector<GradSuiteRow> rows;
  bool matched = false;
  for (const auto& e : gradient_suite()) {
    if (selection != "all" && selection != e.module && selection != e.name) continue;
    matched = true;
    for (std::uint64_t seed : seeds) {
      GradCase c = e.build(seed);
      if (e.name == sign_flip) c.op = sign_flipped(c.op);
      rows.push_back({e.name, e.module, seed, finite_diff_check(c.op, c.x, e.eps, e.tol, seed)});
    }
  }
  if (!matched) throw DomainError("unknown gradient check module '" + selection + "'");
  return rows;
}

}  // namespace shadowforge
