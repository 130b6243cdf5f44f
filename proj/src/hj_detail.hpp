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

#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>

#include "robustroa/hj.hpp"

namespace robustroa::hj::detail {

// Lines a_θ + b_θ·u of one Hamiltonian evaluation; at most a handful of
// scenarios and inputs, so fixed small buffers suffice.
inline constexpr std::size_t kMaxScenarios = 8;
inline constexpr std::size_t kMaxInputs = 8;

struct Lines {
  std::size_t count = 0;
  std::size_t m = 0;
  double a[kMaxScenarios];
  double b[kMaxScenarios][kMaxInputs];
};

// Adds one scenario line from its drift, input and disturbance columns
// (each a pair of doubles). The disturbance is resolved here; in literal
// mode the line is negated so that combine() always computes min_u max_θ.
inline void add_line(Lines& lines, const double* drift, const double* g, const double* d,
                     std::size_t m, std::size_t q, const double* w_lo, const double* w_hi,
                     double p0, double p1, bool literal) {
  double a = p0 * drift[0] + p1 * drift[1];
  for (std::size_t j = 0; j < q; ++j) {
    const double pd = p0 * d[2 * j] + p1 * d[2 * j + 1];
    a += literal ? std::min(pd * w_lo[j], pd * w_hi[j]) : std::max(pd * w_lo[j], pd * w_hi[j]);
  }
  const double s = literal ? -1.0 : 1.0;
  const std::size_t k = lines.count++;
  lines.m = m;
  lines.a[k] = s * a;
  for (std::size_t i = 0; i < m; ++i) lines.b[k][i] = s * (p0 * g[2 * i] + p1 * g[2 * i + 1]);
}

// min over the input box of max over the lines; negated back in literal mode.
inline double combine(const Lines& lines, const double* u_lo, const double* u_hi, bool literal) {
  const double s = literal ? -1.0 : 1.0;
  if (lines.count == 1) {
    double h = lines.a[0];
    for (std::size_t i = 0; i < lines.m; ++i)
      h += std::min(lines.b[0][i] * u_lo[i], lines.b[0][i] * u_hi[i]);
    return s * h;
  }
  auto upper = [&](double u) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < lines.count; ++k)
      best = std::max(best, lines.a[k] + (lines.m ? lines.b[k][0] * u : 0.0));
    return best;
  };
  if (lines.m == 0) return s * upper(0.0);
  // Convex piecewise-linear in the single input: the minimum sits at an end
  // of the interval or where two lines cross.
  double h = std::min(upper(u_lo[0]), upper(u_hi[0]));
  for (std::size_t i = 0; i < lines.count; ++i) {
    for (std::size_t j = i + 1; j < lines.count; ++j) {
      const double db = lines.b[i][0] - lines.b[j][0];
      if (db == 0.0) continue;
      const double u = (lines.a[j] - lines.a[i]) / db;
      if (u > u_lo[0] && u < u_hi[0]) h = std::min(h, upper(u));
    }
  }
  return s * h;
}

}  // namespace robustroa::hj::detail
