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

// Uniform forward/VJP contract for the differentiable pipeline stages and a
// central-difference checker for it.
//
// All inputs of an operation are packed into one flat vector; named groups
// select slices of it (e.g. "vertices", "phi"). An operation maps it to a flat
// output; vjp(x, u) returns J(x)^T u.

#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "shadowforge/core/error.hpp"
#include "shadowforge/core/random.hpp"

namespace shadowforge {

using FlatVector = std::vector<double>;

struct InputGroup {
  std::string name;
  size_t begin = 0;
  size_t end = 0;
  bool differentiable = true;
};

struct DiffOp {
  std::string name;
  std::function<FlatVector(const FlatVector&)> forward;
  std::function<FlatVector(const FlatVector& x, const FlatVector& cotangent)> vjp;
  std::vector<InputGroup> groups;  // empty: the whole input is one group
  // Optional per-output weights multiplied into the random cotangent; used
  // to exclude saturated outputs whose derivatives are numerically flat.
  std::function<FlatVector(const FlatVector&)> cotangent_mask;
};

struct GradCheckReport {
  struct Group {
    std::string name;
    double max_rel_error = 0.0;
  };
  std::vector<Group> groups;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string diagnosis;  // non-empty on non-finite values
};

namespace detail {
inline bool all_finite(const FlatVector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}
}  // namespace detail

// For each differentiable group, compares <vjp(x, u), d> against the central
// difference (g(x + eps d) - g(x - eps d)) / (2 eps) of g = <u, f> along
// random unit directions d supported on the group. Relative error uses the
// denominator max(1, |analytic|).
inline GradCheckReport finite_diff_check(const DiffOp& op, const FlatVector& x, double eps, double tol,
                                         std::uint64_t seed, int directions = 6) {
  if (eps < 1e-7 || eps > 1e-3) throw DomainError("finite difference step must be in [1e-7, 1e-3]");
  GradCheckReport report;
  report.tolerance = tol;
  Rng rng(seed);

  const FlatVector y = op.forward(x);
  if (!detail::all_finite(y)) {
    report.diagnosis = op.name + ": forward produced non-finite values";
    return report;
  }
  FlatVector u(y.size());
  if (y.size() == 1) {
    u[0] = 1.0;
  } else {
    for (double& v : u) v = standard_normal(rng);
  }
  if (op.cotangent_mask) {
    const FlatVector mask = op.cotangent_mask(x);
    for (size_t i = 0; i < u.size(); ++i) u[i] *= mask[i];
  }
  const FlatVector grad = op.vjp(x, u);
  if (grad.size() != x.size()) {
    report.diagnosis = op.name + ": vjp returned " + std::to_string(grad.size()) + " entries for " +
                       std::to_string(x.size()) + " inputs";
    return report;
  }
  if (!detail::all_finite(grad)) {
    report.diagnosis = op.name + ": vjp produced non-finite values";
    return report;
  }

  auto project = [&](const FlatVector& v) {
    double s = 0.0;
    for (size_t i = 0; i < v.size(); ++i) s += u[i] * v[i];
    return s;
  };

  std::vector<InputGroup> groups = op.groups;
  if (groups.empty()) groups.push_back({"x", 0, x.size(), true});

  for (const auto& g : groups) {
    if (!g.differentiable || g.end <= g.begin) continue;
    GradCheckReport::Group result{g.name, 0.0};
    for (int k = 0; k < directions; ++k) {
      FlatVector d(x.size(), 0.0);
      double len = 0.0;
      for (size_t i = g.begin; i < g.end; ++i) {
        d[i] = standard_normal(rng);
        len += d[i] * d[i];
      }
      len = std::sqrt(len);
      for (size_t i = g.begin; i < g.end; ++i) d[i] /= len;

      double analytic = 0.0;
      for (size_t i = g.begin; i < g.end; ++i) analytic += grad[i] * d[i];

      FlatVector xp = x, xm = x;
      for (size_t i = g.begin; i < g.end; ++i) {
        xp[i] += eps * d[i];
        xm[i] -= eps * d[i];
      }
      const FlatVector yp = op.forward(xp), ym = op.forward(xm);
      if (!detail::all_finite(yp) || !detail::all_finite(ym)) {
        report.diagnosis = op.name + ": forward non-finite at perturbed input (group " + g.name + ")";
        return report;
      }
      const double numeric = (project(yp) - project(ym)) / (2.0 * eps);
      const double rel = std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
      result.max_rel_error = std::max(result.max_rel_error, rel);
    }
    report.max_rel_error = std::max(report.max_rel_error, result.max_rel_error);
    report.groups.push_back(result);
  }
  report.pass = report.max_rel_error <= tol;
  return report;
}

inline std::string describe(const GradCheckReport& r) {
  std::ostringstream os;
  if (!r.diagnosis.empty()) return "FAIL " + r.diagnosis;
  os << (r.pass ? "pass" : "FAIL") << " max_rel_err=" << r.max_rel_error << " tol=" << r.tolerance;
  for (const auto& g : r.groups) os << " [" << g.name << " " << g.max_rel_error << "]";
  return os.str();
}

}  // namespace shadowforge
