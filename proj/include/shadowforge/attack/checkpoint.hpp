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

// Attack checkpoints as JSON. Doubles are written with 17 significant
// digits, which round-trips every finite value exactly.

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "shadowforge/attack/attack.hpp"

namespace shadowforge {

constexpr int kCheckpointVersion = 1;

namespace detail {

inline nlohmann::json adam_json(const AdamState& a) { return {{"m", a.m}, {"v", a.v}, {"t", a.t}}; }

inline AdamState adam_from(const nlohmann::json& j) {
  AdamState a;
  a.m = j.at("m").get<std::vector<double>>();
  a.v = j.at("v").get<std::vector<double>>();
  a.t = j.at("t").get<std::int64_t>();
  if (a.m.size() != a.v.size()) throw AssetError("corrupt checkpoint: Adam moment sizes differ");
  return a;
}

}  // namespace detail

inline nlohmann::json checkpoint_json(const AttackState& s) {
  nlohmann::json patterns = nlohmann::json::array();
  for (const auto& p : s.patterns) {
    nlohmann::json offs = nlohmann::json::array();
    for (const auto& o : p.offsets) offs.push_back({o.x, o.y, o.z});
    patterns.push_back({{"offsets", offs}, {"center", {p.center.x, p.center.y}}, {"phi", p.phi}});
  }
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : s.history) history.push_back({h.total, h.det, h.normal, h.edge, h.chamfer, h.laplacian});
  return {{"version", kCheckpointVersion},
          {"iteration", s.iteration},
          {"patterns", patterns},
          {"adam", {{"offsets", detail::adam_json(s.adam_offsets)},
                    {"center", detail::adam_json(s.adam_center)},
                    {"phi", detail::adam_json(s.adam_phi)}}},
          {"history", history},
          {"events", s.events}};
}

inline AttackState checkpoint_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version")) throw AssetError("corrupt checkpoint: missing version");
  const int version = j["version"].get<int>();
  if (version != kCheckpointVersion)
    throw AssetError("checkpoint version mismatch: file has " + std::to_string(version) + ", expected " +
                     std::to_string(kCheckpointVersion));
  AttackState s;
  try {
    s.iteration = j.at("iteration").get<int>();
    for (const auto& p : j.at("patterns")) {
      PatternState ps;
      for (const auto& o : p.at("offsets")) ps.offsets.push_back({o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>()});
      ps.center = {p.at("center").at(0).get<double>(), p.at("center").at(1).get<double>()};
      ps.phi = p.at("phi").get<double>();
      s.patterns.push_back(std::move(ps));
    }
    s.adam_offsets = detail::adam_from(j.at("adam").at("offsets"));
    s.adam_center = detail::adam_from(j.at("adam").at("center"));
    s.adam_phi = detail::adam_from(j.at("adam").at("phi"));
    for (const auto& h : j.at("history"))
      s.history.push_back({h.at(0).get<double>(), h.at(1).get<double>(), h.at(2).get<double>(), h.at(3).get<double>(),
                           h.at(4).get<double>(), h.at(5).get<double>()});
    s.events = j.at("events").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw AssetError(std::string("corrupt checkpoint: ") + e.what());
  }
  if (s.iteration < 0 || static_cast<size_t>(s.iteration) != s.history.size())
    throw AssetError("corrupt checkpoint: iteration count and loss history disagree");
  return s;
}

inline void save_checkpoint(const AttackState& s, const std::filesystem::path& path) {
  write_file_bytes(path, checkpoint_json(s).dump() + "\n");
}

inline AttackState load_checkpoint(const std::filesystem::path& path) {
  const std::string text = read_file_bytes(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw AssetError("corrupt checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

// Checks that a checkpoint fits the problem an Attack was built for.
inline void check_compatible(const Attack& attack, const AttackState& s) {
  if (static_cast<int>(s.patterns.size()) != attack.config().num_patterns)
    throw DomainError("checkpoint pattern count differs from the config");
  for (const auto& p : s.patterns)
    if (p.offsets.size() != attack.offsets_per_pattern()) throw DomainError("checkpoint offset count differs from the config");
  const size_t n = s.patterns.size();
  if (s.adam_offsets.m.size() != n * attack.offsets_per_pattern() * 3 || s.adam_center.m.size() != n * 2 ||
      s.adam_phi.m.size() != n)
    throw DomainError("checkpoint optimizer state does not match the config");
}

}  // namespace shadowforge
