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

// Attack success rate over a viewing grid: the fraction of views in which no
// detection reaches the confidence threshold with enough overlap with the
// ground-truth silhouette box.

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shadowforge/core/image_io.hpp"
#include "shadowforge/core/parallel.hpp"
#include "shadowforge/eval/grid.hpp"
#include "shadowforge/objective/detector.hpp"
#include "shadowforge/scene/model.hpp"

namespace shadowforge {

enum class ViewStatus { kCounted, kExcluded, kErrored };

struct ViewRecord {
  CameraParams camera;
  ViewStatus status = ViewStatus::kCounted;
  bool detected = false;
  double best_score = 0.0;  // highest score of any detection
  double best_iou = 0.0;    // highest IOU of any detection with the GT box
  std::string note;
};

struct Marginal {
  double value = 0.0;
  int counted = 0;
  int undetected = 0;
  double asr() const { return counted ? static_cast<double>(undetected) / counted : 0.0; }
};

struct AsrReport {
  double conf_thresh = 0.6, iou_thresh = 0.5;
  int counted = 0, undetected = 0, excluded = 0, errored = 0;
  std::vector<Marginal> by_azim, by_elev, by_dist;
  std::vector<ViewRecord> views;

  double asr() const { return counted ? static_cast<double>(undetected) / counted : 0.0; }
};

struct AsrOptions {
  double conf_thresh = 0.6;
  double iou_thresh = 0.5;
  int workers = 1;
  // Transport failures abort the evaluation; any other detector error only
  // marks its view.
  bool abort_on_network_error = true;
};

inline bool is_detected(const std::vector<Detection>& dets, const BBox& gt, double conf, double iou_thresh) {
  for (const auto& d : dets)
    if (d.score >= conf && iou(d.box, gt) >= iou_thresh) return true;
  return false;
}

// Overall counts and marginals, derived from the per-view records alone.
inline void summarize(AsrReport& r, const EvalGrid& grid) {
  r.counted = r.undetected = r.excluded = r.errored = 0;
  std::map<double, Marginal> az, el, di;
  for (double a : grid.azim) az[a].value = a;
  for (double e : grid.elev) el[e].value = e;
  for (double d : grid.dist) di[d].value = d;
  for (const auto& v : r.views) {
    if (v.status == ViewStatus::kExcluded) {
      ++r.excluded;
      continue;
    }
    if (v.status == ViewStatus::kErrored) {
      ++r.errored;
      continue;
    }
    ++r.counted;
    const int miss = v.detected ? 0 : 1;
    r.undetected += miss;
    for (auto [m, value] : {std::pair{&az, v.camera.azim}, {&el, v.camera.elev}, {&di, v.camera.dist}}) {
      Marginal& cell = (*m)[value];
      cell.value = value;
      ++cell.counted;
      cell.undetected += miss;
    }
  }
  auto flatten = [](const std::map<double, Marginal>& m) {
    std::vector<Marginal> out;
    for (const auto& [k, v] : m) out.push_back(v);
    return out;
  };
  r.by_azim = flatten(az);
  r.by_elev = flatten(el);
  r.by_dist = flatten(di);
}

inline ViewRecord evaluate_view(const CarModel& model, const TextureMap& texture, const Detector& detector,
                                const CameraParams& cam, const AsrOptions& opt) {
  ViewRecord rec;
  rec.camera = cam;
  const RenderedImage img = render(model.mesh, texture, cam, model.background);
  const auto gt = silhouette_bbox(img);
  if (!gt || !gt->valid()) {
    rec.status = ViewStatus::kExcluded;
    rec.note = "no object: car out of frame";
    return rec;
  }
  std::vector<Detection> dets;
  try {
    dets = detector.evaluate(img.gray);
  } catch (const SchemaError& e) {
    rec.status = ViewStatus::kErrored;
    rec.note = e.what();
    return rec;
  } catch (const NetworkError&) {
    if (opt.abort_on_network_error) throw;
    rec.status = ViewStatus::kErrored;
    rec.note = "network error";
    return rec;
  } catch (const std::exception& e) {
    rec.status = ViewStatus::kErrored;
    rec.note = e.what();
    return rec;
  }
  for (const auto& d : dets) {
    rec.best_score = std::max(rec.best_score, d.score);
    rec.best_iou = std::max(rec.best_iou, iou(d.box, *gt));
  }
  rec.detected = is_detected(dets, *gt, opt.conf_thresh, opt.iou_thresh);
  return rec;
}

inline AsrReport compute_asr(const CarModel& model, const TextureMap& texture, const Detector& detector,
                             const EvalGrid& grid, const AsrOptions& opt = {}) {
  validate(grid);
  if (texture.width != model.texture.width || texture.height != model.texture.height)
    throw DomainError("texture size " + std::to_string(texture.width) + "x" + std::to_string(texture.height) +
                      " does not match the model texture layout");
  const auto cams = grid.views();
  AsrReport r;
  r.conf_thresh = opt.conf_thresh;
  r.iou_thresh = opt.iou_thresh;
  r.views.resize(cams.size());
  parallel_for(static_cast<int>(cams.size()), opt.workers,
               [&](int i) { r.views[i] = evaluate_view(model, texture, detector, cams[i], opt); });
  summarize(r, grid);
  return r;
}

inline const char* status_name(ViewStatus s) {
  return s == ViewStatus::kCounted ? "counted" : s == ViewStatus::kExcluded ? "excluded" : "errored";
}

inline nlohmann::json to_json(const AsrReport& r) {
  auto marginals = [](const std::vector<Marginal>& ms) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& m : ms) a.push_back({{"value", m.value}, {"counted", m.counted}, {"undetected", m.undetected}, {"asr", m.asr()}});
    return a;
  };
  nlohmann::json views = nlohmann::json::array();
  for (const auto& v : r.views)
    views.push_back({{"azim", v.camera.azim}, {"elev", v.camera.elev}, {"dist", v.camera.dist},
                     {"status", status_name(v.status)}, {"detected", v.detected}, {"best_score", v.best_score},
                     {"best_iou", v.best_iou}, {"note", v.note}});
  return {{"asr", r.asr()},
          {"conf_thresh", r.conf_thresh},
          {"iou_thresh", r.iou_thresh},
          {"counted", r.counted},
          {"undetected", r.undetected},
          {"excluded", r.excluded},
          {"errored", r.errored},
          {"by_azim", marginals(r.by_azim)},
          {"by_elev", marginals(r.by_elev)},
          {"by_dist", marginals(r.by_dist)},
          {"views", views}};
}

inline std::string marginal_csv(const std::vector<Marginal>& ms, const std::string& key) {
  std::ostringstream os;
  os.precision(17);
  os << key << ",counted,undetected,asr\n";
  for (const auto& m : ms) os << m.value << "," << m.counted << "," << m.undetected << "," << m.asr() << "\n";
  return os.str();
}

// ASR over (azim, elev), pooled across distances. One cell per grid node,
// azim along x, elev along y with the highest elevation at the top; cells
// without counted views are black.
inline Image asr_heatmap(const AsrReport& r, const EvalGrid& grid, int cell = 16) {
  std::map<double, int> ai, ei;
  for (double a : grid.azim) ai.emplace(a, 0);
  for (double e : grid.elev) ei.emplace(e, 0);
  int k = 0;
  for (auto& [a, i] : ai) i = k++;
  k = 0;
  for (auto& [e, i] : ei) i = k++;
  std::vector<int> counted(ai.size() * ei.size()), miss(ai.size() * ei.size());
  for (const auto& v : r.views) {
    if (v.status != ViewStatus::kCounted) continue;
    const size_t idx = ei.at(v.camera.elev) * ai.size() + ai.at(v.camera.azim);
    ++counted[idx];
    miss[idx] += v.detected ? 0 : 1;
  }
  Image img(static_cast<int>(ai.size()) * cell, static_cast<int>(ei.size()) * cell);
  for (size_t e = 0; e < ei.size(); ++e)
    for (size_t a = 0; a < ai.size(); ++a) {
      const size_t idx = e * ai.size() + a;
      const double v = counted[idx] ? static_cast<double>(miss[idx]) / counted[idx] : 0.0;
      const int row = static_cast<int>(ei.size() - 1 - e);
      for (int y = 0; y < cell; ++y)
        for (int x = 0; x < cell; ++x) img.at(static_cast<int>(a) * cell + x, row * cell + y) = v;
    }
  return img;
}

inline void write_report(const AsrReport& r, const EvalGrid& grid, const std::filesystem::path& dir) {
  write_file_bytes(dir / "asr_report.json", to_json(r).dump(2) + "\n");
  write_file_bytes(dir / "asr_by_azim.csv", marginal_csv(r.by_azim, "azim"));
  write_file_bytes(dir / "asr_by_elev.csv", marginal_csv(r.by_elev, "elev"));
  write_file_bytes(dir / "asr_by_dist.csv", marginal_csv(r.by_dist, "dist"));
  write_image(dir / "asr_heatmap.png", asr_heatmap(r, grid));
}

}  // namespace shadowforge
