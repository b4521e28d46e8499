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

// Command implementations behind the shadowforge tool. Each returns a
// process exit code and writes diagnostics to the given stream; flag parsing
// lives in the tool itself.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "shadowforge/attack/run.hpp"
#include "shadowforge/core/hash.hpp"
#include "shadowforge/diff/suite.hpp"
#include "shadowforge/eval/asr.hpp"
#include "shadowforge/eval/bridge.hpp"
#include "shadowforge/eval/sticker.hpp"

namespace shadowforge {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitAsset = 2, kExitNetwork = 3, kExitDomain = 4 };

// Runs fn and maps the exception family to an exit code.
inline int guarded(std::ostream& err, const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const AssetError& e) {
    err << "error: " << e.what() << "\n";
    return kExitAsset;
  } catch (const SchemaError& e) {
    err << "error: " << e.what() << "\nraw payload: " << e.raw_payload() << "\n";
    return kExitNetwork;
  } catch (const NetworkError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNetwork;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const CapabilityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

inline nlohmann::json asset_hashes(const std::vector<std::filesystem::path>& paths) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& p : paths)
    if (!p.empty()) j[p.string()] = sha256_file(p);
  return j;
}

inline nlohmann::json model_hashes(const CarModel& m, const std::filesystem::path& model_path) {
  return asset_hashes({model_path, m.mesh_path, m.texture_path});
}

inline TemplateDetector builtin_detector(const CarModel& m, WindowAggregation aggregation = WindowAggregation::kSoftmax) {
  TemplateDetectorOptions opt;
  opt.aggregation = aggregation;
  return build_template_detector(m.mesh, m.texture, m.calibration_view, m.background, opt);
}

inline void write_manifest(const std::filesystem::path& out, nlohmann::json manifest) {
  manifest["tool_version"] = kToolVersion;
  write_file_bytes(out / "manifest.json", manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------- optimize

struct OptimizeOptions {
  std::filesystem::path config;
  std::filesystem::path out;
  std::filesystem::path model;  // overrides the config's "model" entry
  std::optional<std::uint64_t> seed;
  std::optional<int> iterations;
  std::optional<int> workers;
  std::filesystem::path resume;  // checkpoint to continue from
  int log_every = 25;
};

inline int cmd_optimize(const OptimizeOptions& o, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    const nlohmann::json raw = json_from_file(o.config);
    AttackConfig config = load_attack_config(o.config);
    if (o.seed) config.seed = *o.seed;
    if (o.iterations) config.iterations = *o.iterations;
    if (o.workers) config.workers = *o.workers;
    validate(config);
    std::filesystem::path model_path = o.model;
    if (model_path.empty()) {
      if (!raw.contains("model") || !raw["model"].is_string()) throw DomainError("no model: pass --model or set \"model\" in the config");
      model_path = o.config.parent_path() / raw["model"].get<std::string>();
    }
    const CarModel model = load_model(model_path);
    const TemplateDetector detector = builtin_detector(model, config.aggregation);

    RunOptions ro;
    ro.checkpoint_on_error = o.out / "checkpoint.json";
    if (!o.resume.empty()) ro.resume = load_checkpoint(o.resume);
    ro.on_step = [&](const AttackState& s, const ForwardResult& r) {
      if (o.log_every > 0 && (s.iteration % o.log_every == 0 || s.iteration == config.iterations))
        log << "iter " << s.iteration << " " << Attack::describe(r.loss) << "\n" << std::flush;
    };
    const RunResult result = run(config, model, detector, ro);

    std::vector<std::string> outputs = {"T_adv.png", "checkpoint.json"};
    write_image(o.out / "T_adv.png", result.texture);
    save_checkpoint(result.state, o.out / "checkpoint.json");
    for (size_t i = 0; i < result.patterns.size(); ++i) {
      const std::string name = "pattern_" + std::to_string(i) + ".png";
      write_image(o.out / name, result.patterns[i].alpha);
      outputs.push_back(name);
    }
    nlohmann::json manifest = result.manifest;
    manifest["command"] = "optimize";
    manifest["model"] = std::filesystem::absolute(model_path).string();
    manifest["asset_hashes"] = model_hashes(model, model_path);
    if (!o.resume.empty()) manifest["resumed_from"] = o.resume.string();
    manifest["outputs"] = outputs;
    manifest["output_hashes"] = {{"T_adv.png", sha256_file(o.out / "T_adv.png")}};
    write_manifest(o.out, manifest);
    for (const auto& w : result.manifest["warnings"]) err << "warning: " << w.get<std::string>() << "\n";
    log << "wrote " << (o.out / "T_adv.png").string() << "\n";
    return kExitOk;
  });
}

// -------------------------------------------------------------------- eval

struct EvalOptions {
  std::filesystem::path texture;
  std::string detector = "builtin";  // or bridge:URL
  std::string grid = "default";      // default, reduced or a grid JSON file
  std::filesystem::path out;
  std::filesystem::path model;
  double conf_thresh = 0.6;
  double iou_thresh = 0.5;
  int workers = 0;
};

inline int cmd_eval(const EvalOptions& o, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    const auto t0 = std::chrono::steady_clock::now();
    const EvalGrid grid = resolve_grid(o.grid);
    const CarModel model = load_model(o.model);
    const TextureMap texture = read_image(o.texture);
    std::unique_ptr<Detector> detector;
    if (o.detector == "builtin") {
      detector = std::make_unique<TemplateDetector>(builtin_detector(model));
    } else if (o.detector.rfind("bridge:", 0) == 0) {
      detector = std::make_unique<BridgeDetector>(o.detector.substr(7));
    } else {
      throw DomainError("unknown detector '" + o.detector + "'; expected builtin or bridge:URL");
    }
    AsrOptions ao;
    ao.conf_thresh = o.conf_thresh;
    ao.iou_thresh = o.iou_thresh;
    ao.workers = o.workers > 0 ? o.workers : default_workers();
    const AsrReport report = compute_asr(model, texture, *detector, grid, ao);
    write_report(report, grid, o.out);
    std::vector<std::filesystem::path> assets = {o.texture};
    if (std::filesystem::exists(o.grid)) assets.push_back(o.grid);
    nlohmann::json hashes = model_hashes(model, o.model);
    hashes.update(asset_hashes(assets));
    write_manifest(o.out, {{"command", "eval"},
                           {"texture", o.texture.string()},
                           {"detector", o.detector},
                           {"grid", to_json(grid)},
                           {"grid_views", grid.size()},
                           {"conf_thresh", o.conf_thresh},
                           {"iou_thresh", o.iou_thresh},
                           {"asset_hashes", hashes},
                           {"asr", report.asr()},
                           {"counted", report.counted},
                           {"excluded", report.excluded},
                           {"errored", report.errored},
                           {"outputs", {"asr_report.json", "asr_by_azim.csv", "asr_by_elev.csv", "asr_by_dist.csv", "asr_heatmap.png"}},
                           {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}});
    log << std::fixed << std::setprecision(4) << "ASR " << report.asr() << " (" << report.undetected << "/" << report.counted
        << " undetected, " << report.excluded << " excluded, " << report.errored << " errored)\n";
    return kExitOk;
  });
}

// ------------------------------------------------------------------ render

struct RenderOptions {
  CameraParams camera;
  std::filesystem::path texture;  // empty: the model's own texture
  std::filesystem::path out;
  std::filesystem::path model;
};

inline int cmd_render(const RenderOptions& o, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    validate(o.camera);
    const CarModel model = load_model(o.model);
    const TextureMap texture = o.texture.empty() ? model.texture : read_image(o.texture);
    if (texture.width != model.texture.width || texture.height != model.texture.height)
      throw DomainError("texture size does not match the model texture layout");
    write_image(o.out, render(model.mesh, texture, o.camera, model.background).gray);
    log << "wrote " << o.out.string() << "\n";
    return kExitOk;
  });
}

// --------------------------------------------------------------- gradcheck

struct GradcheckOptions {
  std::string module = "all";
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  std::string sign_flip;  // test hook: negate this entry's VJP
};

inline int cmd_gradcheck(const GradcheckOptions& o, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    const auto rows = run_gradient_suite(o.module, o.seeds, o.sign_flip);
    bool ok = true;
    log << std::left << std::setw(30) << "operation" << std::setw(6) << "seed" << "result\n";
    for (const auto& r : rows) {
      log << std::left << std::setw(30) << r.name << std::setw(6) << r.seed << describe(r.report) << "\n";
      ok = ok && r.report.pass;
    }
    if (!ok) {
      err << "gradient check failures:\n";
      for (const auto& r : rows)
        if (!r.report.pass) err << "  " << r.name << " seed " << r.seed << ": max rel err " << r.report.max_rel_error << "\n";
    }
    return ok ? kExitOk : kExitInternal;
  });
}

// ---------------------------------------------------------- export-sticker

struct StickerOptions {
  std::filesystem::path pattern;
  double mm_per_texel = 1.0;
  double threshold = 0.5;
  std::filesystem::path out;
};

inline int cmd_export_sticker(const StickerOptions& o, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
  return guarded(err, [&] {
    const Image alpha = read_image(o.pattern);
    const Sticker s = export_sticker({alpha}, o.threshold, o.mm_per_texel);
    write_sticker(s, o.out);
    write_manifest(o.out, {{"command", "export-sticker"},
                           {"pattern", o.pattern.string()},
                           {"threshold", o.threshold},
                           {"mm_per_texel", o.mm_per_texel},
                           {"polygons", s.polygons.size()},
                           {"area_mm2", s.area_mm2()},
                           {"asset_hashes", asset_hashes({o.pattern})},
                           {"outputs", {"sticker.svg", "sticker.png"}}});
    log << s.polygons.size() << " polygon(s), " << s.area_mm2() << " mm^2\n";
    return kExitOk;
  });
}

}  // namespace shadowforge
