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

#include "robustroa/roa.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "robustroa/error.hpp"

namespace robustroa::roa {

void Ellipsoid2::validate() const {
  if (p.rows() != 2 || p.cols() != 2) throw Error(ErrorCode::DimensionMismatch, "ellipsoid matrix must be 2x2");
  if (!linalg::try_cholesky(p)) throw Error(ErrorCode::NotPositiveDefinite, "ellipsoid matrix");
  if (!(level >= 0.0) || !std::isfinite(level)) throw Error(ErrorCode::InvalidArgument, "ellipsoid level");
}

Point2 Ellipsoid2::boundary(double theta) const {
  // x = c + √level · L⁻ᵀ z with P = LLᵀ and |z| = 1.
  const auto l = linalg::cholesky(p);
  const double r = std::sqrt(level);
  const double z0 = r * std::cos(theta), z1 = r * std::sin(theta);
  const double y1 = z1 / l(1, 1);
  const double y0 = (z0 - l(1, 0) * y1) / l(0, 0);
  return {center[0] + y0, center[1] + y1};
}

namespace {

// Half a cell of value change along each axis, from the steepest edge
// slopes of the enclosing cell.
double guard(const hj::ValueGrid& v, const Point2& x) {
  const auto& g = v.grid;
  std::size_t idx[2];
  for (int d = 0; d < 2; ++d) {
    const double s = std::floor((x[d] - g.lo[d]) / g.spacing(d));
    idx[d] = static_cast<std::size_t>(std::clamp(s, 0.0, static_cast<double>(g.n[d] - 2)));
  }
  const double h0 = g.spacing(0), h1 = g.spacing(1);
  const double a = v.at(idx[0], idx[1]), b = v.at(idx[0] + 1, idx[1]);
  const double c = v.at(idx[0], idx[1] + 1), d = v.at(idx[0] + 1, idx[1] + 1);
  const double sx = std::max(std::abs(b - a), std::abs(d - c)) / h0;
  const double sy = std::max(std::abs(c - a), std::abs(d - b)) / h1;
  return 0.5 * (h0 * sx + h1 * sy);
}

}  // namespace

ContainmentReport check_containment(const Ellipsoid2& e, const hj::ValueGrid& brs, const hj::TargetSet& target,
                                    const ContainmentOptions& opts) {
  e.validate();
  if (brs.v.size() != brs.grid.size()) throw Error(ErrorCode::GridMismatch, "value grid size");
  if (opts.samples < 3) throw Error(ErrorCode::InvalidArgument, "need at least 3 boundary samples");
  auto margin_at = [&](const Point2& x) {
    if (!brs.grid.contains(x)) throw Error(ErrorCode::OutOfGrid, "ellipsoid leaves the grid");
    const double delta = guard(brs, x);
    return -std::max(brs.interpolate(x), target.eval(x)) - delta;
  };
  double margin = margin_at(e.center);
  if (e.level > 0.0) {
    for (std::size_t k = 0; k < opts.samples; ++k) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(opts.samples);
      margin = std::min(margin, margin_at(e.boundary(theta)));
    }
  }
  return {margin >= 0.0, margin};
}

bool ellipsoid_contained(const Ellipsoid2& e, const hj::ValueGrid& brs, const hj::TargetSet& target,
                         const ContainmentOptions& opts) {
  return check_containment(e, brs, target, opts).contained;
}

WmaxResult find_wmax(clf::ClfCertificate& cert, const hj::ValueGrid& brs, const hj::TargetSet& target,
                     const WmaxOptions& opts) {
  if (!(opts.w_hi > 0.0) || !(opts.tol > 0.0) || opts.tol >= opts.w_hi)
    throw Error(ErrorCode::InvalidArgument, "bracket needs 0 < tol < w_hi");
  auto probe = [&](double w) {
    const Ellipsoid2 e{cert.p, {0.0, 0.0}, clf::roa_level(cert.params, w)};
    try {
      return check_containment(e, brs, target, opts.containment);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::OutOfGrid) throw;
      return ContainmentReport{false, -1.0};
    }
  };

  const ContainmentReport base = probe(0.0);
  if (!base.contained) throw Error(ErrorCode::NoSafeRoa, "origin is not inside the safe set");

  WmaxResult res;
  const ContainmentReport top = probe(opts.w_hi);
  double lo = 0.0, hi = opts.w_hi;
  ContainmentReport best = base;
  if (top.contained) {
    res.bracket_too_small = true;
    lo = opts.w_hi;
    best = top;
  }
  const auto iterations = static_cast<std::size_t>(std::ceil(std::log2(opts.w_hi / opts.tol)));
  if (!res.bracket_too_small) {
    for (std::size_t k = 0; k < iterations; ++k) {
      const double mid = 0.5 * (lo + hi);
      const ContainmentReport r = probe(mid);
      if (r.contained) {
        lo = mid;
        best = r;
      } else {
        hi = mid;
      }
      ++res.iterations;
    }
  }
  res.w_max = lo;
  res.level = clf::roa_level(cert.params, lo);
  res.margin = best.margin;
  cert.set_w_max(lo);
  return res;
}

}  // namespace robustroa::roa
