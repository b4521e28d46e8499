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
#include <limits>

#include "shadowforge/diff/adam.hpp"
#include "shadowforge/diff/gradcheck.hpp"
#include "shadowforge/diff/suite.hpp"
#include "shadowforge/geometry/primitives.hpp"
#include "shadowforge/losses/smoothness.hpp"

namespace sf = shadowforge;

namespace {

sf::DiffOp squared_norm_op() {
  sf::DiffOp op;
  op.name = "squared_norm";
  op.forward = [](const sf::FlatVector& x) {
    double s = 0;
    for (double v : x) s += v * v;
    return sf::FlatVector{s};
  };
  op.vjp = [](const sf::FlatVector& x, const sf::FlatVector& u) {
    sf::FlatVector g(x.size());
    for (size_t i = 0; i < x.size(); ++i) g[i] = 2.0 * x[i] * u[0];
    return g;
  };
  return op;
}

}  // namespace

TEST(GradCheck, SquaredNorm) {
  sf::Rng rng(3);
  sf::FlatVector x(10);
  for (double& v : x) v = sf::standard_normal(rng);
  const auto r = sf::finite_diff_check(squared_norm_op(), x, 1e-5, 1e-8, 1);
  EXPECT_TRUE(r.pass) << sf::describe(r);
  EXPECT_LT(r.max_rel_error, 1e-8);
}

TEST(GradCheck, ConstantFunction) {
  sf::DiffOp op;
  op.forward = [](const sf::FlatVector&) { return sf::FlatVector{4.2}; };
  op.vjp = [](const sf::FlatVector& x, const sf::FlatVector&) { return sf::FlatVector(x.size(), 0.0); };
  const auto r = sf::finite_diff_check(op, sf::FlatVector{1, 2, 3}, 1e-5, 1e-12, 1);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.max_rel_error, 0.0);
}

TEST(GradCheck, EdgeLengthMeanOnIcosphere) {
  const auto mesh = sf::make_icosphere(1, 1.0);
  sf::DiffOp op;
  op.forward = [mesh](const sf::FlatVector& x) {
    auto m = mesh;
    m.vertices = sf::unflatten(x);
    return sf::FlatVector{sf::edge_length_mean(m)};
  };
  op.vjp = [mesh](const sf::FlatVector& x, const sf::FlatVector& u) {
    auto m = mesh;
    m.vertices = sf::unflatten(x);
    std::vector<sf::Vec3> g;
    sf::edge_length_mean(m, &g);
    auto out = sf::flatten(g);
    for (double& v : out) v *= u[0];
    return out;
  };
  EXPECT_TRUE(sf::finite_diff_check(op, sf::flatten(mesh.vertices), 1e-6, 1e-4, 1).pass);
}

TEST(GradCheck, DetectsWrongSign) {
  sf::FlatVector x{1.0, -2.0, 0.5};
  const auto r = sf::finite_diff_check(sf::sign_flipped(squared_norm_op()), x, 1e-5, 1e-4, 1);
  EXPECT_FALSE(r.pass);
  EXPECT_GT(r.max_rel_error, 1.0);
}

TEST(GradCheck, NonFiniteForwardIsDiagnosed) {
  sf::DiffOp op;
  op.name = "log";
  op.forward = [](const sf::FlatVector& x) { return sf::FlatVector{std::log(x[0])}; };
  op.vjp = [](const sf::FlatVector& x, const sf::FlatVector& u) { return sf::FlatVector{u[0] / x[0]}; };
  const auto r = sf::finite_diff_check(op, sf::FlatVector{-1.0}, 1e-5, 1e-4, 1);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(r.diagnosis.find("non-finite"), std::string::npos);
}

TEST(GradCheck, NonFiniteGradientIsDiagnosed) {
  sf::DiffOp op;
  op.name = "inf";
  op.forward = [](const sf::FlatVector& x) { return sf::FlatVector{x[0]}; };
  op.vjp = [](const sf::FlatVector&, const sf::FlatVector&) {
    return sf::FlatVector{std::numeric_limits<double>::infinity()};
  };
  const auto r = sf::finite_diff_check(op, sf::FlatVector{1.0}, 1e-5, 1e-4, 1);
  EXPECT_FALSE(r.pass);
  EXPECT_FALSE(r.diagnosis.empty());
}

TEST(GradCheck, StepOutOfRange) {
  EXPECT_THROW(sf::finite_diff_check(squared_norm_op(), {1.0}, 1e-2, 1e-4, 1), sf::DomainError);
  EXPECT_THROW(sf::finite_diff_check(squared_norm_op(), {1.0}, 1e-9, 1e-4, 1), sf::DomainError);
}

TEST(Adam, ZeroGradientLeavesParams) {
  std::vector<double> p{0.3, -1.2, 4.0};
  const auto before = p;
  sf::AdamState s(3);
  sf::adam_step(p, {0, 0, 0}, s, {0.1, 0.9, 0.999, 1e-8});
  EXPECT_EQ(p, before);
  EXPECT_EQ(s.t, 1);
}

TEST(Adam, FirstStepsMoveByLearningRate) {
  // With a constant gradient, m_hat = g and v_hat = g^2 at every step.
  std::vector<double> p{1.0};
  sf::AdamState s(1);
  const sf::AdamHyper h{0.1, 0.9, 0.999, 1e-8};
  sf::adam_step(p, {1.0}, s, h);
  EXPECT_NEAR(p[0], 0.9, 1e-7);
  sf::adam_step(p, {1.0}, s, h);
  EXPECT_NEAR(p[0], 0.8, 1e-7);
  EXPECT_EQ(s.t, 2);
}

TEST(Adam, MatchesHandComputedSecondStep) {
  std::vector<double> p{0.0};
  sf::AdamState s(1);
  const sf::AdamHyper h{0.5, 0.9, 0.999, 0.0};
  sf::adam_step(p, {2.0}, s, h);
  sf::adam_step(p, {-1.0}, s, h);
  const double m = 0.9 * 0.2 + 0.1 * -1.0, v = 0.999 * 0.004 + 0.001 * 1.0;
  const double expected = -0.5 - 0.5 * (m / (1 - 0.81)) / std::sqrt(v / (1 - 0.999 * 0.999));
  EXPECT_NEAR(p[0], expected, 1e-12);
}

TEST(Adam, Deterministic) {
  auto run = [] {
    std::vector<double> p{0.1, 0.2, 0.3};
    sf::AdamState s(3);
    for (int i = 0; i < 10; ++i) sf::adam_step(p, {std::sin(i + p[0]), p[1] * 0.3, -1.0}, s, {});
    return std::make_pair(p, s);
  };
  const auto a = run(), b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(Adam, ShapeMismatchAndBadRate) {
  std::vector<double> p{1.0, 2.0};
  sf::AdamState s(2);
  EXPECT_THROW(sf::adam_step(p, {1.0}, s, {}), sf::DomainError);
  sf::AdamState wrong(3);
  EXPECT_THROW(sf::adam_step(p, {1.0, 1.0}, wrong, {}), sf::DomainError);
  EXPECT_THROW(sf::adam_step(p, {1.0, 1.0}, s, {0.0, 0.9, 0.999, 1e-8}), sf::DomainError);
}

class GradientSuite : public ::testing::TestWithParam<std::string> {};

TEST_P(GradientSuite, PassesOnThreeSeeds) {
  for (const auto& row : sf::run_gradient_suite(GetParam())) {
    EXPECT_TRUE(row.report.pass) << row.name << " seed " << row.seed << ": " << sf::describe(row.report);
  }
}

TEST_P(GradientSuite, SignFlipIsCaught) {
  for (const auto& row : sf::run_gradient_suite(GetParam(), {1}, GetParam())) {
    EXPECT_FALSE(row.report.pass) << row.name;
  }
}

INSTANTIATE_TEST_SUITE_P(Ops, GradientSuite, ::testing::ValuesIn([] {
                           std::vector<std::string> names;
                           for (const auto& e : sf::gradient_suite()) names.push_back(e.name);
                           return names;
                         }()),
                         [](const auto& info) { return info.param; });

TEST(GradientSuiteRegistry, CoversEveryDifferentiableModule) {
  const auto modules = sf::gradient_suite_modules();
  for (const char* m : {"geometry", "shadow", "scene", "losses", "objective", "attack", "composition"})
    EXPECT_NE(std::find(modules.begin(), modules.end(), m), modules.end()) << m;
  int compositions = 0;
  for (const auto& e : sf::gradient_suite()) compositions += e.module == "composition";
  EXPECT_GE(compositions, 3);
}

TEST(GradientSuiteRegistry, UnknownSelection) {
  EXPECT_THROW(sf::run_gradient_suite("nonexistent"), sf::DomainError);
}
