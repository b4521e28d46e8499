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

#include <chrono>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>

#include <nlohmann/json.hpp>

#include "shadowforge/attack/attack.hpp"
#include "shadowforge/attack/checkpoint.hpp"

namespace shadowforge {

struct RunOptions {
  std::optional<AttackState> resume;
  // Last good state is written here if a step throws.
  std::filesystem::path checkpoint_on_error;
  std::function<void(const AttackState&, const ForwardResult&)> on_step;
};

struct RunResult {
  AttackState state;
  TextureMap texture;
  std::vector<PatternRaster> patterns;
  std::vector<TriMesh> meshes;
  nlohmann::json manifest;
};

inline nlohmann::json loss_json(const LossRecord& l) {
  return {{"total", l.total}, {"det", l.det}, {"normal", l.normal}, {"edge", l.edge}, {"chamfer", l.chamfer},
          {"laplacian", l.laplacian}};
}

inline RunResult run(const AttackConfig& config, const CarModel& model, const Detector& detector, RunOptions options = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const Attack attack(config, model, detector);
  AttackState state = options.resume ? *options.resume : attack.initial_state();
  check_compatible(attack, state);
  std::vector<std::string> warnings;
  std::set<std::string> seen;
  while (state.iteration < config.iterations) {
    const AttackState last_good = state;
    try {
      const ForwardResult r = attack.step(state);
      for (const auto& w : r.warnings)
        if (seen.insert(w).second) warnings.push_back(w);
      if (options.on_step) options.on_step(state, r);
    } catch (...) {
      if (!options.checkpoint_on_error.empty()) save_checkpoint(last_good, options.checkpoint_on_error);
      throw;
    }
  }

  RunResult out;
  const PasteResult pasted = attack.adversarial_texture(state);
  for (const auto& w : pasted.warnings)
    if (seen.insert(w).second) warnings.push_back(w);
  out.texture = pasted.texture;
  out.patterns = attack.patterns(state, state.iteration);
  for (const auto& p : state.patterns) out.meshes.push_back(attack.adversarial_mesh(p));

  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : state.history) history.push_back(loss_json(h));
  nlohmann::json patterns = nlohmann::json::array();
  for (size_t i = 0; i < state.patterns.size(); ++i)
    patterns.push_back({{"region", config.regions[i % config.regions.size()]},
                        {"center", {state.patterns[i].center.x, state.patterns[i].center.y}},
                        {"phi", state.patterns[i].phi},
                        {"normal_consistency", normal_consistency(out.meshes[i])}});
  out.manifest = {{"config", to_json(config)},
                  {"iterations_run", state.iteration},
                  {"loss_history", history},
                  {"patterns", patterns},
                  {"warnings", warnings},
                  {"events", state.events}};
  if (!config.view_pool.empty()) {
    out.manifest["pool_confidence_clean"] = attack.pool_confidence(model.texture);
    out.manifest["pool_confidence_final"] = attack.pool_confidence(out.texture);
  }
  out.manifest["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.state = std::move(state);
  return out;
}

}  // namespace shadowforge
