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
#include <set>

#include "shadowforge/geometry/primitives.hpp"
#include "shadowforge/geometry/sampling.hpp"
#include "shadowforge/losses/smoothness.hpp"
#include "test_util.hpp"

namespace sf = shadowforge;
using sf::Vec3;

namespace {

sf::TriMesh planar_grid() {
  sf::TriMesh m;
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x) m.vertices.push_back({double(x), double(y), 0});
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x) {
      const int a = y * 3 + x;
      m.faces.push_back({a, a + 1, a + 4});
      m.faces.push_back({a, a + 4, a + 3});
    }
  return m;
}

sf::TriMesh tetrahedron() {
  sf::TriMesh m;
  m.vertices = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  m.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
  return m;
}

sf::TriMesh hex_fan() {
  sf::TriMesh m;
  m.vertices.push_back({0, 0, 0});
  for (int k = 0; k < 6; ++k) m.vertices.push_back({std::cos(k * M_PI / 3), std::sin(k * M_PI / 3), 0});
  for (int k = 0; k < 6; ++k) m.faces.push_back({0, 1 + k, 1 + (k + 1) % 6});
  return m;
}

sf::TriMesh transformed(sf::TriMesh m, double angle, const Vec3& shift) {
  const Vec3 axis = sf::normalized(Vec3{0.3, -0.7, 0.4});
  for (auto& v : m.vertices) {
    // Rodrigues rotation
    const double c = std::cos(angle), s = std::sin(angle);
    v = c * v + s * sf::cross(axis, v) + (1 - c) * sf::dot(axis, v) * axis + shift;
  }
  return m;
}

sf::TriMesh scaled(sf::TriMesh m, double k) {
  for (auto& v : m.vertices) v = k * v;
  return m;
}

double brute_chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double total = 0;
  for (const auto& p : a) {
    double best = INFINITY;
    for (const auto& q : b) best = std::min(best, sf::squared_norm(p - q));
    total += best;
  }
  for (const auto& q : b) {
    double best = INFINITY;
    for (const auto& p : a) best = std::min(best, sf::squared_norm(p - q));
    total += best;
  }
  return total;
}

std::vector<Vec3> random_cloud(sf::Rng& rng, int n) {
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) out.push_back(sftest::random_vec3(rng));
  return out;
}

}  // namespace

TEST(NormalConsistency, FlatGridIsZero) { EXPECT_EQ(sf::normal_consistency(planar_grid()), 0.0); }

TEST(NormalConsistency, RightAngleFold) {
  sf::TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  m.faces = {{0, 1, 2}, {0, 3, 1}};
  EXPECT_NEAR(sf::normal_consistency(m), 1.0, 1e-12);
}

TEST(NormalConsistency, SubdivisionSmooths) {
  EXPECT_LT(sf::normal_consistency(sf::make_icosphere(2, 1.0)), sf::normal_consistency(sf::make_icosphere(1, 1.0)));
}

TEST(NormalConsistency, NoAdjacentFaces) {
  sf::TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}};
  EXPECT_THROW(sf::normal_consistency(m), sf::DomainError);
}

TEST(NormalConsistency, MatchesPairwiseOracle) {
  const auto m = sf::make_icosphere(1, 1.0);
  double total = 0;
  int pairs = 0;
  for (size_t i = 0; i < m.faces.size(); ++i)
    for (size_t j = i + 1; j < m.faces.size(); ++j) {
      int shared = 0;
      for (int a : m.faces[i])
        for (int b : m.faces[j]) shared += a == b;
      if (shared != 2) continue;
      const Vec3 ni = sf::normalized(sf::face_normal_unnormalized(m, m.faces[i]));
      const Vec3 nj = sf::normalized(sf::face_normal_unnormalized(m, m.faces[j]));
      total += 1 - sf::dot(ni, nj);
      ++pairs;
    }
  EXPECT_EQ(pairs, 120);
  EXPECT_NEAR(sf::normal_consistency(m), total / pairs, 1e-12);
}

TEST(EdgeLength, EquilateralTriangle) {
  sf::TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0.5, std::sqrt(3.0) / 2, 0}};
  m.faces = {{0, 1, 2}};
  EXPECT_NEAR(sf::edge_length_mean(m), 1.0, 1e-15);
}

TEST(EdgeLength, HomogeneousOfDegreeOne) {
  const auto m = sf::make_icosphere(1, 0.7);
  EXPECT_DOUBLE_EQ(sf::edge_length_mean(scaled(m, 2.0)), 2.0 * sf::edge_length_mean(m));
}

TEST(EdgeLength, MatchesEdgeWalkOracle) {
  const auto m = sf::make_icosphere(1, 1.0);
  std::set<std::pair<int, int>> edges;
  for (const auto& f : m.faces)
    for (int k = 0; k < 3; ++k) edges.insert(std::minmax(f[k], f[(k + 1) % 3]));
  double total = 0;
  for (const auto& [a, b] : edges) total += sf::norm(m.vertices[a] - m.vertices[b]);
  EXPECT_EQ(edges.size(), 120u);
  EXPECT_NEAR(sf::edge_length_mean(m), total / edges.size(), 1e-14);
}

TEST(Chamfer, SelfDistanceZero) {
  sf::Rng rng(1);
  const auto s = random_cloud(rng, 50);
  EXPECT_EQ(sf::chamfer(s, s), 0.0);
}

TEST(Chamfer, TwoPoints) { EXPECT_DOUBLE_EQ(sf::chamfer({Vec3{0, 0, 0}}, {Vec3{1, 0, 0}}), 2.0); }

TEST(Chamfer, MatchesBruteForce) {
  sf::Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_cloud(rng, 100), b = random_cloud(rng, 100);
    const double expected = brute_chamfer(a, b);
    EXPECT_NEAR(sf::chamfer(a, b), expected, 1e-12 * std::max(1.0, expected));
  }
}

TEST(Chamfer, EmptyCloud) { EXPECT_THROW(sf::chamfer(std::vector<Vec3>{}, {Vec3{}}), sf::DomainError); }

TEST(Chamfer, ScalesQuadratically) {
  sf::Rng rng(4);
  auto a = random_cloud(rng, 60), b = random_cloud(rng, 40);
  const double base = sf::chamfer(a, b);
  for (auto& p : a) p = 3.0 * p;
  for (auto& p : b) p = 3.0 * p;
  EXPECT_NEAR(sf::chamfer(a, b), 9.0 * base, 1e-10 * base);
}

TEST(Chamfer, GradientDescentOnVerticesDecreases) {
  const auto target = sf::surface_sample(sf::make_icosphere(2, 0.3), 500, 11).points;
  auto mesh = sf::make_icosphere(2, 0.3);
  sf::Rng rng(5);
  for (auto& v : mesh.vertices) v += sftest::random_vec3(rng, 0.03);
  const auto prov = sf::surface_sample(mesh, 500, 12).provenance;
  double prev = INFINITY;
  for (int step = 0; step < 50; ++step) {
    const auto pts = sf::points_from_provenance(mesh, prov);
    std::vector<Vec3> gp;
    const double value = sf::chamfer(pts, target, &gp, nullptr);
    EXPECT_LT(value, prev) << "step " << step;
    prev = value;
    const auto gv = sf::surface_sample_vjp(mesh, prov, gp);
    for (size_t i = 0; i < mesh.vertices.size(); ++i) mesh.vertices[i] -= 2e-3 * gv[i];
  }
}

TEST(Laplacian, TetrahedronClosedForm) {
  // Each vertex v has the other three as neighbors, whose mean is -v/3.
  EXPECT_NEAR(sf::laplacian_smoothing(tetrahedron()), 4.0 / std::sqrt(3.0), 1e-12);
}

TEST(Laplacian, HexFanCenterContributesNothing) {
  // Ring vertex k: neighbors are the center and ring k +/- 1, mean v_k / 3, so
  // each ring term is 2/3. The center's neighbor mean is itself.
  EXPECT_NEAR(sf::laplacian_smoothing(hex_fan()), 6.0 * (2.0 / 3.0) / 7.0, 1e-12);
}

TEST(Laplacian, IsolatedVertex) {
  auto m = tetrahedron();
  m.vertices.push_back({5, 5, 5});
  EXPECT_THROW(sf::laplacian_smoothing(m), sf::DomainError);
}

TEST(Losses, RigidMotionInvariance) {
  sf::Rng rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    auto m = sf::make_icosphere(1, 1.0);
    for (auto& v : m.vertices) v += sftest::random_vec3(rng, 0.05);
    const auto t = transformed(m, sf::uniform(rng, -3, 3), sftest::random_vec3(rng, 5));
    EXPECT_NEAR(sf::normal_consistency(t), sf::normal_consistency(m), 1e-9);
    EXPECT_NEAR(sf::laplacian_smoothing(t), sf::laplacian_smoothing(m), 1e-9);
    EXPECT_NEAR(sf::edge_length_mean(t), sf::edge_length_mean(m), 1e-9);
  }
}

TEST(Losses, Nonnegative) {
  sf::Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    auto m = sf::make_icosphere(1, 1.0);
    for (auto& v : m.vertices) v += sftest::random_vec3(rng, 0.3);
    const auto cloud = sf::surface_sample(m, 100, trial).points;
    EXPECT_GE(sf::normal_consistency(m), 0.0);
    EXPECT_LE(sf::normal_consistency(m), 2.0);
    EXPECT_GE(sf::edge_length_mean(m), 0.0);
    EXPECT_GE(sf::laplacian_smoothing(m), 0.0);
    EXPECT_GE(sf::chamfer(cloud, random_cloud(rng, 30)), 0.0);
  }
}

TEST(Combine, Examples) {
  EXPECT_DOUBLE_EQ(sf::combine(0.7, 1, 2, 3, 4, {0, 0, 0, 0}), 0.7);
  EXPECT_DOUBLE_EQ(sf::combine(1, 1, 1, 1, 1, {1, 1, 1, 1}), 5.0);
  EXPECT_NEAR(sf::combine(0.2, 0.4, 0.1, 0.6, 0.5, {0.5, 1.0, 1.0, 0.3}), 1.25, 1e-15);
}

TEST(Combine, RejectsNonFiniteAndNegativeWeights) {
  EXPECT_THROW(sf::combine(NAN, 0, 0, 0, 0, {}), sf::DomainError);
  EXPECT_THROW(sf::combine(0, INFINITY, 0, 0, 0, {}), sf::DomainError);
  EXPECT_THROW(sf::combine(0, 0, 0, 0, 0, {-1, 0, 0, 0}), sf::DomainError);
}
