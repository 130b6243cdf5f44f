/*
 Copyright 2026 The robustroa Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

// Closed-form reference for the double integrator ẋ₁ = x₂, ẋ₂ = u, |u| ≤ 1
// reaching the square |x₁|, |x₂| ≤ a within a horizon.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "robustroa/hj.hpp"

namespace robustroa::testing {

struct DoubleIntegratorCase {
  double half_width = 0.2;
  double horizon = 0.25;
  double domain = 2.0;
};

// From (p, v) after exactly s seconds the reachable end velocities are
// v' = v + d with |d| ≤ s, and for each v' the reachable positions fill
// [p + sv + sd/2 - (s² - d²)/4, p + sv + sd/2 + (s² - d²)/4].
inline bool di_hits_at(double p, double v, double s, double a) {
  double lo = std::max(-s, -a - v);
  double hi = std::min(s, a - v);
  if (lo > hi) return false;
  const double d1 = 2 * s * s - 4 * p - 4 * s * v + 4 * a;  // lower end ≤ a
  const double d2 = 2 * s * s + 4 * p + 4 * s * v + 4 * a;  // upper end ≥ -a
  if (d1 < 0 || d2 < 0) return false;
  lo = std::max({lo, -s - std::sqrt(d1), s - std::sqrt(d2)});
  hi = std::min({hi, -s + std::sqrt(d1), s + std::sqrt(d2)});
  return lo <= hi;
}

inline bool di_member(double p, double v, const DoubleIntegratorCase& c, int samples = 1000) {
  for (int k = 0; k <= samples; ++k)
    if (di_hits_at(p, v, c.horizon * k / samples, c.half_width)) return true;
  return false;
}

using Points = std::vector<hj::Point2>;

// Boundary of the analytic set: midpoints of fine lattice edges whose end
// points disagree on membership.
inline Points di_boundary(const DoubleIntegratorCase& c, double step) {
  const double ext = c.half_width + c.horizon + 0.5 * c.horizon * c.horizon + 0.1;
  const auto n = static_cast<std::size_t>(std::ceil(2 * ext / step)) + 1;
  std::vector<char> in(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) in[i * n + j] = di_member(-ext + i * step, -ext + j * step, c);
  Points pts;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double x = -ext + i * step, y = -ext + j * step;
      if (i + 1 < n && in[i * n + j] != in[(i + 1) * n + j]) pts.push_back({x + step / 2, y});
      if (j + 1 < n && in[i * n + j] != in[i * n + j + 1]) pts.push_back({x, y + step / 2});
    }
  }
  return pts;
}

// Zero crossings of V along grid edges, linearly interpolated.
inline Points zero_crossings(const hj::ValueGrid& v) {
  Points pts;
  const auto& g = v.grid;
  for (std::size_t i = 0; i < g.n[0]; ++i) {
    for (std::size_t j = 0; j < g.n[1]; ++j) {
      const double a = v.at(i, j);
      auto edge = [&](std::size_t i2, std::size_t j2, int axis) {
        const double b = v.at(i2, j2);
        if ((a <= 0) == (b <= 0)) return;
        const double t = a / (a - b);
        hj::Point2 x = g.node(i, j);
        x[axis] += t * g.spacing(axis);
        pts.push_back(x);
      };
      if (i + 1 < g.n[0]) edge(i + 1, j, 0);
      if (j + 1 < g.n[1]) edge(i, j + 1, 1);
    }
  }
  return pts;
}

inline double directed_distance(const Points& from, const Points& to) {
  double worst = 0.0;
  for (const auto& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : to) best = std::min(best, std::hypot(p[0] - q[0], p[1] - q[1]));
    worst = std::max(worst, best);
  }
  return worst;
}

inline double hausdorff(const Points& a, const Points& b) {
  return std::max(directed_distance(a, b), directed_distance(b, a));
}

inline hj::AffineDynamics2 double_integrator() {
  hj::AffineDynamics2 dyn;
  dyn.u_lo = {-1.0};
  dyn.u_hi = {1.0};
  dyn.scenarios = {[](const hj::Point2& x) {
    hj::AffineTerms t;
    t.drift = {x[1], 0.0};
    t.g = {{0.0, 1.0}};
    return t;
  }};
  return dyn;
}

inline hj::BrsResult di_solve(const DoubleIntegratorCase& c, std::size_t n) {
  const hj::Grid2 grid{{-c.domain, -c.domain}, {c.domain, c.domain}, {n, n}};
  hj::BrsOptions opts;
  opts.horizon = -c.horizon;
  return hj::solve_brs(grid, hj::TargetSet::box({0, 0}, {c.half_width, c.half_width}), double_integrator(), opts);
}

}  // namespace robustroa::testing
