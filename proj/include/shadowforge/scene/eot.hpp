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

// Expectation-over-transformation perturbations: vertex jitter of the
// adversarial mesh, salt-and-pepper noise on the coverage raster, a gray
// level offset, a paste position offset and a background draw.

#include <cstdint>
#include <vector>

#include "shadowforge/core/image.hpp"
#include "shadowforge/core/random.hpp"
#include "shadowforge/core/vec.hpp"

namespace shadowforge {

struct EotBounds {
  double vertex_sigma = 0.0;     // model units
  double noise_density = 0.0;    // fraction of texels hit
  double noise_amplitude = 0.0;  // alpha change of a hit texel
  double gray_delta = 0.0;       // gray ~ U(-gray_delta, gray_delta)
  double pos_delta = 0.0;        // texels, per axis
  int background_count = 1;      // size of the background pool
};

inline void validate(const EotBounds& b) {
  if (b.vertex_sigma < 0 || b.noise_density < 0 || b.noise_density > 1 || b.noise_amplitude < 0 || b.gray_delta < 0 ||
      b.pos_delta < 0 || b.background_count < 1)
    throw DomainError("EOT bounds out of range");
}

// One draw for a rendered view: per-pattern perturbations plus the
// view's background.
struct EotSample {
  double vertex_sigma = 0.0;
  double noise_density = 0.0;
  double noise_amplitude = 0.0;
  std::vector<std::uint64_t> jitter_seeds;  // per pattern
  std::vector<std::uint64_t> noise_seeds;   // per pattern
  std::vector<double> gray_delta;           // per pattern
  std::vector<Vec2> pos_delta;              // per pattern
  int background_id = 0;

  bool operator==(const EotSample&) const = default;
};

inline EotSample eot_sample(const EotBounds& b, int num_patterns, std::uint64_t seed) {
  validate(b);
  Rng rng(seed);
  EotSample s;
  s.vertex_sigma = b.vertex_sigma;
  s.noise_density = b.noise_density;
  s.noise_amplitude = b.noise_amplitude;
  for (int i = 0; i < num_patterns; ++i) {
    s.jitter_seeds.push_back(rng());
    s.noise_seeds.push_back(rng());
    s.gray_delta.push_back(uniform(rng, -b.gray_delta, b.gray_delta));
    const double dx = uniform(rng, -b.pos_delta, b.pos_delta);
    const double dy = uniform(rng, -b.pos_delta, b.pos_delta);
    s.pos_delta.push_back({dx, dy});
  }
  s.background_id = static_cast<int>(uniform01(rng) * b.background_count);
  if (s.background_id >= b.background_count) s.background_id = b.background_count - 1;
  return s;
}

struct NoisyAlpha {
  Image alpha;
  Image pass;  // 1 where the gradient passes through, 0 where clamped
};

// Salt-and-pepper: each texel independently, with probability `density`,
// moves by +amplitude or -amplitude (equal odds), then clamps to [0,1].
inline NoisyAlpha apply_pattern_noise(const Image& alpha, double density, double amplitude, std::uint64_t seed) {
  NoisyAlpha out{alpha, Image(alpha.width, alpha.height, 1.0)};
  if (density <= 0.0 || amplitude <= 0.0) return out;
  Rng rng(seed);
  for (size_t i = 0; i < alpha.size(); ++i) {
    const double hit = uniform01(rng);
    const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
    if (hit >= density) continue;
    const double v = alpha.data[i] + sign * amplitude;
    if (v < 0.0 || v > 1.0) {
      out.alpha.data[i] = std::clamp(v, 0.0, 1.0);
      out.pass.data[i] = 0.0;
    } else {
      out.alpha.data[i] = v;
    }
  }
  return out;
}

}  // namespace shadowforge
