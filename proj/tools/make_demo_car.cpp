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

// Writes the bundled demo car: a low-poly sedan with an atlas-mapped
// infrared texture and its model config.
//
//   make_demo_car <out_dir>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "shadowforge/core/image_io.hpp"
#include "shadowforge/geometry/obj.hpp"

namespace sf = shadowforge;
using sf::Vec2;
using sf::Vec3;

namespace {

constexpr int kTextureSize = 256;
constexpr double kTexelsPerMeter = kTextureSize / 4.4;

struct Panel {
  int x, y, w, h;  // texel rectangle, top-left origin
};

// Atlas layout. Both body sides share one rectangle so a door sticker shows
// on each side of the car.
constexpr Panel kSide{0, 0, 256, 44};
constexpr Panel kFront{0, 44, 105, 44};
constexpr Panel kBack{105, 44, 105, 44};
constexpr Panel kWheel{214, 44, 32, 32};
constexpr Panel kHood{0, 88, 105, 76};
constexpr Panel kRoof{105, 88, 81, 70};
constexpr Panel kDeck{0, 164, 105, 52};
constexpr Panel kWindshield{128, 164, 105, 45};
constexpr Panel kRearWindow{128, 209, 105, 37};
constexpr Panel kCabinSide{0, 216, 128, 31};

class Builder {
 public:
  // Quad a-b-c-d, counterclockwise seen from outside. a maps to the panel's
  // bottom-left texel corner, b bottom-right, c top-right, d top-left.
  void quad(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, const Panel& p) {
    const int base = static_cast<int>(mesh_.vertices.size());
    const int tbase = static_cast<int>(mesh_.uvs.size());
    for (const Vec3& v : {a, b, c, d}) mesh_.vertices.push_back(v);
    // Half-texel inset keeps bilinear taps inside the panel.
    const double su = p.w < 0 ? -0.5 : 0.5;
    const double u0 = (p.x + su) / kTextureSize, u1 = (p.x + p.w - su) / kTextureSize;
    const double v0 = 1.0 - (p.y + p.h - 0.5) / kTextureSize, v1 = 1.0 - (p.y + 0.5) / kTextureSize;
    for (const Vec2& t : {Vec2{u0, v0}, Vec2{u1, v0}, Vec2{u1, v1}, Vec2{u0, v1}}) mesh_.uvs.push_back(t);
    mesh_.faces.push_back({base, base + 1, base + 2});
    mesh_.faces.push_back({base, base + 2, base + 3});
    mesh_.uv_faces.push_back({tbase, tbase + 1, tbase + 2});
    mesh_.uv_faces.push_back({tbase, tbase + 2, tbase + 3});
  }

  // Axis-aligned box without its bottom face.
  void box(const Vec3& lo, const Vec3& hi, const Panel& p) {
    const double x0 = lo.x, y0 = lo.y, z0 = lo.z, x1 = hi.x, y1 = hi.y, z1 = hi.z;
    quad({x0, y0, z1}, {x1, y0, z1}, {x1, y1, z1}, {x0, y1, z1}, p);  // +z
    quad({x1, y0, z0}, {x0, y0, z0}, {x0, y1, z0}, {x1, y1, z0}, p);  // -z
    quad({x1, y0, z1}, {x1, y0, z0}, {x1, y1, z0}, {x1, y1, z1}, p);  // +x
    quad({x0, y0, z0}, {x0, y0, z1}, {x0, y1, z1}, {x0, y1, z0}, p);  // -x
    quad({x0, y1, z1}, {x1, y1, z1}, {x1, y1, z0}, {x0, y1, z0}, p);  // +y
  }

  sf::TriMesh take() { return std::move(mesh_); }

 private:
  sf::TriMesh mesh_;
};

sf::TriMesh build_mesh() {
  Builder b;
  const double W = 0.9, y0 = 0.25, y1 = 1.0, zf = 2.2, zr = -2.2;
  // Lower body. Front is +z and maps to the left edge of the side panel.
  b.quad({W, y0, zf}, {W, y0, zr}, {W, y1, zr}, {W, y1, zf}, kSide);
  b.quad({-W, y0, zr}, {-W, y0, zf}, {-W, y1, zf}, {-W, y1, zr}, Panel{kSide.x + kSide.w, kSide.y, -kSide.w, kSide.h});
  b.quad({-W, y0, zf}, {W, y0, zf}, {W, y1, zf}, {-W, y1, zf}, kFront);
  b.quad({W, y0, zr}, {-W, y0, zr}, {-W, y1, zr}, {W, y1, zr}, kBack);

  // Cabin footprint on the body and its roof.
  const double cf = 0.9, cr = -1.3, tf = 0.3, tr = -0.9, y2 = 1.5, Wt = 0.7;
  b.quad({-W, y1, zf}, {W, y1, zf}, {W, y1, cf}, {-W, y1, cf}, kHood);
  b.quad({-W, y1, cr}, {W, y1, cr}, {W, y1, zr}, {-W, y1, zr}, kDeck);
  b.quad({-W, y1, cf}, {W, y1, cf}, {Wt, y2, tf}, {-Wt, y2, tf}, kWindshield);
  b.quad({W, y1, cr}, {-W, y1, cr}, {-Wt, y2, tr}, {Wt, y2, tr}, kRearWindow);
  b.quad({W, y1, cf}, {W, y1, cr}, {Wt, y2, tr}, {Wt, y2, tf}, kCabinSide);
  b.quad({-W, y1, cr}, {-W, y1, cf}, {-Wt, y2, tf}, {-Wt, y2, tr},
         Panel{kCabinSide.x + kCabinSide.w, kCabinSide.y, -kCabinSide.w, kCabinSide.h});
  b.quad({-Wt, y2, tf}, {Wt, y2, tf}, {Wt, y2, tr}, {-Wt, y2, tr}, kRoof);

  // Wheels stand slightly proud of the body sides.
  for (double z : {1.4, -1.4})
    for (double s : {1.0, -1.0}) {
      const double xi = s * 0.78, xo = s * 0.95;
      b.box({std::min(xi, xo), 0.0, z - 0.36}, {std::max(xi, xo), 0.62, z + 0.36}, kWheel);
    }
  return b.take();
}

void fill(sf::Image& t, const Panel& p, auto&& value) {
  for (int j = 0; j < p.h; ++j)
    for (int i = 0; i < p.w; ++i) t.at(p.x + i, p.y + j) = std::clamp(value((i + 0.5) / p.w, (j + 0.5) / p.h), 0.0, 1.0);
}

// Grayscale infrared appearance: warm engine bay, exhaust and brake hubs.
sf::Image build_texture() {
  sf::Image t(kTextureSize, kTextureSize, 0.5);
  fill(t, kSide, [](double u, double v) {
    double g = 0.74 - 0.06 * u;  // warmer toward the engine (u = 0 is the front)
    if (std::abs(u - 0.52) < 0.006 || std::abs(u - 0.78) < 0.006) g -= 0.12;  // door seams
    if (v > 0.85) g -= 0.08;  // sill
    return g;
  });
  fill(t, kFront, [](double u, double v) {
    const bool grille = std::abs(u - 0.5) < 0.3 && v > 0.35 && v < 0.75;
    const bool lamp = (u < 0.15 || u > 0.85) && v < 0.35;
    return grille ? 0.92 : lamp ? 0.55 : 0.78;
  });
  fill(t, kBack, [](double u, double v) {
    const double ex = std::hypot(u - 0.8, v - 0.85);
    return ex < 0.1 ? 0.95 : 0.66 - 0.04 * v;
  });
  fill(t, kWheel, [](double u, double v) {
    const double r = std::hypot(u - 0.5, v - 0.5);
    return r < 0.22 ? 0.82 : 0.6;  // hot brake hub
  });
  fill(t, kHood, [](double u, double v) {
    const double r = std::hypot(u - 0.5, (v - 0.25) * 1.2);
    return 0.72 + 0.18 * std::exp(-r * r / 0.08);
  });
  fill(t, kRoof, [](double, double) { return 0.6; });
  fill(t, kDeck, [](double, double v) { return 0.64 + 0.03 * v; });
  // Glass is opaque at these wavelengths and shows the warm cabin behind it.
  fill(t, kWindshield, [](double, double v) { return 0.62 + 0.06 * v; });
  fill(t, kRearWindow, [](double, double v) { return 0.63 + 0.05 * v; });
  fill(t, kCabinSide, [](double u, double) { return std::abs(u - 0.45) < 0.03 ? 0.58 : 0.66; });  // B-pillar
  return t;
}

nlohmann::json rect_json(const Panel& p) { return {p.x, p.y, p.x + p.w, p.y + p.h}; }

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_demo_car <out_dir>\n";
    return 1;
  }
  const std::filesystem::path out = argv[1];
  try {
    sf::save_obj(out / "car.obj", build_mesh());
    sf::write_image(out / "texture.png", build_texture());
    const nlohmann::json model = {
        {"mesh", "car.obj"},
        {"texture", "texture.png"},
        {"texels_per_meter", kTexelsPerMeter},
        {"regions",
         {{"door", rect_json(kSide)}, {"roof", rect_json(kRoof)}, {"hood", rect_json(kHood)}, {"rear", rect_json(kDeck)}}},
        {"calibration_view", {{"azim", 60.0}, {"elev", 15.0}, {"dist", 6.0}}},
        {"background", 0.35}};
    sf::write_file_bytes(out / "model.json", model.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "make_demo_car: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
