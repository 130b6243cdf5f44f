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

#include "robustroa/hj.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "hj_detail.hpp"
#include "robustroa/error.hpp"

namespace robustroa::hj {

bool Grid2::contains(const Point2& x) const {
  return x[0] >= lo[0] && x[0] <= hi[0] && x[1] >= lo[1] && x[1] <= hi[1];
}

void Grid2::validate() const {
  for (int d = 0; d < 2; ++d) {
    if (n[d] < 3) throw Error(ErrorCode::InvalidArgument, "grid needs at least 3 nodes per axis");
    if (!(hi[d] > lo[d])) throw Error(ErrorCode::InvalidArgument, "grid bounds must satisfy lo < hi");
  }
}

TargetSet TargetSet::box(Point2 center, Point2 half_width) {
  TargetSet t;
  t.kind = TargetKind::Box;
  t.center = center;
  t.half_width = half_width;
  return t;
}

TargetSet TargetSet::ellipse(Point2 center, linalg::SymMatrix p, double level) {
  if (p.rows() != 2 || p.cols() != 2) throw Error(ErrorCode::DimensionMismatch, "ellipse matrix must be 2x2");
  if (!linalg::try_cholesky(p)) throw Error(ErrorCode::NotPositiveDefinite, "ellipse matrix");
  TargetSet t;
  t.kind = TargetKind::Ellipse;
  t.center = center;
  t.p = std::move(p);
  t.level = level;
  return t;
}

bool TargetSet::empty() const {
  if (kind == TargetKind::Box) return half_width[0] <= 0.0 || half_width[1] <= 0.0;
  return level <= 0.0;
}

double TargetSet::eval(const Point2& x) const {
  const double e0 = x[0] - center[0];
  const double e1 = x[1] - center[1];
  if (kind == TargetKind::Ellipse) {
    return p(0, 0) * e0 * e0 + 2.0 * p(0, 1) * e0 * e1 + p(1, 1) * e1 * e1 - level;
  }
  if (empty()) return 1.0 + std::hypot(e0, e1);
  const double q0 = std::abs(e0) - half_width[0];
  const double q1 = std::abs(e1) - half_width[1];
  const double outside = std::hypot(std::max(q0, 0.0), std::max(q1, 0.0));
  return outside + std::min(std::max(q0, q1), 0.0);
}

Point2 TargetSet::extent() const {
  if (kind == TargetKind::Box) return {std::max(half_width[0], 0.0), std::max(half_width[1], 0.0)};
  if (level <= 0.0) return {0.0, 0.0};
  const auto pinv = linalg::inverse(p);
  return {std::sqrt(level * pinv(0, 0)), std::sqrt(level * pinv(1, 1))};
}

Grid2 default_grid(const TargetSet& target, std::size_t n) {
  const auto ext = target.extent();
  Grid2 g;
  for (int d = 0; d < 2; ++d) {
    const double h = ext[d] > 0.0 ? 4.0 * ext[d] : 1.0;
    g.lo[d] = target.center[d] - h;
    g.hi[d] = target.center[d] + h;
    g.n[d] = n;
  }
  return g;
}

double ValueGrid::interpolate(const Point2& x) const {
  if (!grid.contains(x)) throw Error(ErrorCode::OutOfGrid, "interpolation point outside grid");
  std::size_t idx[2];
  double frac[2];
  for (int d = 0; d < 2; ++d) {
    const double s = (x[d] - grid.lo[d]) / grid.spacing(d);
    const auto cells = static_cast<double>(grid.n[d] - 1);
    const double c = std::min(std::floor(s), cells - 1.0);
    idx[d] = static_cast<std::size_t>(c);
    frac[d] = s - c;
  }
  const double v00 = at(idx[0], idx[1]);
  const double v01 = at(idx[0], idx[1] + 1);
  const double v10 = at(idx[0] + 1, idx[1]);
  const double v11 = at(idx[0] + 1, idx[1] + 1);
  return (1 - frac[0]) * ((1 - frac[1]) * v00 + frac[1] * v01) +
         frac[0] * ((1 - frac[1]) * v10 + frac[1] * v11);
}

std::string ValueGrid::to_csv() const {
  std::ostringstream os;
  os << std::setprecision(17) << "x1,x2,V\n";
  for (std::size_t i = 0; i < grid.n[0]; ++i)
    for (std::size_t j = 0; j < grid.n[1]; ++j)
      os << grid.coord(0, i) << ',' << grid.coord(1, j) << ',' << at(i, j) << '\n';
  return os.str();
}

ValueGrid signed_target(const Grid2& grid, const TargetSet& target) {
  grid.validate();
  if (!grid.contains(target.center)) throw Error(ErrorCode::TargetOutsideGrid, "target centre outside grid");
  ValueGrid out{grid, std::vector<double>(grid.size()), 0.0};
  for (std::size_t i = 0; i < grid.n[0]; ++i)
    for (std::size_t j = 0; j < grid.n[1]; ++j) out.v[grid.index(i, j)] = target.eval(grid.node(i, j));
  return out;
}

void AffineDynamics2::validate() const {
  if (u_lo.size() != u_hi.size() || w_lo.size() != w_hi.size())
    throw Error(ErrorCode::DimensionMismatch, "bound vectors differ in length");
  for (std::size_t i = 0; i < u_lo.size(); ++i)
    if (!(u_lo[i] <= u_hi[i])) throw Error(ErrorCode::InvalidArgument, "input bounds inverted");
  for (std::size_t i = 0; i < w_lo.size(); ++i)
    if (!(w_lo[i] <= w_hi[i])) throw Error(ErrorCode::InvalidArgument, "disturbance bounds inverted");
  if (scenarios.empty()) throw Error(ErrorCode::InvalidArgument, "dynamics need at least one scenario");
  if (scenarios.size() > detail::kMaxScenarios || u_lo.size() > detail::kMaxInputs)
    throw Error(ErrorCode::InvalidArgument, "too many scenarios or inputs");
  if (scenarios.size() > 1 && u_lo.size() > 1)
    throw Error(ErrorCode::InvalidArgument, "several scenarios need a single input");
}

const char* to_string(GameMode m) {
  return m == GameMode::ControlMinimizes ? "control-minimizes" : "literal";
}

const char* to_string(SetMode m) { return m == SetMode::Reach ? "reach" : "invariance"; }

namespace {

AffineTerms checked_terms(const AffineDynamics2& dyn, std::size_t s, const Point2& x) {
  AffineTerms t = dyn.scenarios[s](x);
  if (t.g.size() != dyn.num_inputs() || t.d.size() != dyn.num_disturbances())
    throw Error(ErrorCode::DimensionMismatch, "scenario terms do not match bound dimensions");
  return t;
}

}  // namespace

double hamiltonian(const AffineDynamics2& dyn, const Point2& x, const Point2& p, GameMode mode) {
  dyn.validate();
  const bool literal = mode == GameMode::Literal;
  const std::size_t m = dyn.num_inputs();
  const std::size_t q = dyn.num_disturbances();
  detail::Lines lines;
  for (std::size_t s = 0; s < dyn.scenarios.size(); ++s) {
    const AffineTerms t = checked_terms(dyn, s, x);
    std::vector<double> g(2 * m), d(2 * q);
    for (std::size_t i = 0; i < m; ++i) g[2 * i] = t.g[i][0], g[2 * i + 1] = t.g[i][1];
    for (std::size_t i = 0; i < q; ++i) d[2 * i] = t.d[i][0], d[2 * i + 1] = t.d[i][1];
    detail::add_line(lines, t.drift.data(), g.data(), d.data(), m, q, dyn.w_lo.data(),
                     dyn.w_hi.data(), p[0], p[1], literal);
  }
  return detail::combine(lines, dyn.u_lo.data(), dyn.u_hi.data(), literal);
}

LfOperator::LfOperator(const Grid2& grid, const AffineDynamics2& dyn, GameMode mode)
    : grid_(grid), mode_(mode) {
  grid.validate();
  dyn.validate();
  num_scenarios_ = dyn.scenarios.size();
  m_ = dyn.num_inputs();
  q_ = dyn.num_disturbances();
  u_lo_ = dyn.u_lo;
  u_hi_ = dyn.u_hi;
  w_lo_ = dyn.w_lo;
  w_hi_ = dyn.w_hi;
  const std::size_t stride = 2 + 2 * m_ + 2 * q_;
  terms_.resize(grid.size() * num_scenarios_ * stride);
  alpha_.assign(2 * grid.size(), 0.0);
  double amax[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < grid.n[0]; ++i) {
    for (std::size_t j = 0; j < grid.n[1]; ++j) {
      const std::size_t node = grid.index(i, j);
      const Point2 x = grid.node(i, j);
      for (std::size_t s = 0; s < num_scenarios_; ++s) {
        const AffineTerms t = checked_terms(dyn, s, x);
        double* dst = &terms_[(node * num_scenarios_ + s) * stride];
        dst[0] = t.drift[0];
        dst[1] = t.drift[1];
        for (std::size_t k = 0; k < m_; ++k) dst[2 + 2 * k] = t.g[k][0], dst[3 + 2 * k] = t.g[k][1];
        for (std::size_t k = 0; k < q_; ++k)
          dst[2 + 2 * m_ + 2 * k] = t.d[k][0], dst[3 + 2 * m_ + 2 * k] = t.d[k][1];
        for (int c = 0; c < 2; ++c) {
          // max |fᵢ| over the input and disturbance boxes, exact for affine f.
          double mid = t.drift[c], spread = 0.0;
          for (std::size_t k = 0; k < m_; ++k) {
            mid += t.g[k][c] * 0.5 * (u_lo_[k] + u_hi_[k]);
            spread += std::abs(t.g[k][c]) * 0.5 * (u_hi_[k] - u_lo_[k]);
          }
          for (std::size_t k = 0; k < q_; ++k) {
            mid += t.d[k][c] * 0.5 * (w_lo_[k] + w_hi_[k]);
            spread += std::abs(t.d[k][c]) * 0.5 * (w_hi_[k] - w_lo_[k]);
          }
          const double a = std::abs(mid) + spread;
          if (!std::isfinite(a)) throw Error(ErrorCode::NonFinite, "dynamics not finite on grid");
          alpha_[2 * node + c] = std::max(alpha_[2 * node + c], a);
        }
      }
      amax[0] = std::max(amax[0], alpha_[2 * node]);
      amax[1] = std::max(amax[1], alpha_[2 * node + 1]);
    }
  }
  cfl_rate_ = amax[0] / grid.spacing(0) + amax[1] / grid.spacing(1);
}

Point2 LfOperator::alpha(std::size_t node) const { return {alpha_[2 * node], alpha_[2 * node + 1]}; }

BrsResult solve_brs(const Grid2& grid, const TargetSet& target, const AffineDynamics2& dyn,
                    const BrsOptions& opts) {
  if (!(opts.cfl > 0.0) || opts.cfl > kMaxCfl)
    throw Error(ErrorCode::CflViolation, "requested CFL number outside (0, 0.9]");
  if (!opts.converge && !(opts.horizon < 0.0))
    throw Error(ErrorCode::InvalidArgument, "horizon must be negative");
  const ValueGrid l = signed_target(grid, target);
  const LfOperator op(grid, dyn, opts.game);
  const double end = opts.converge ? -opts.max_time : opts.horizon;
  const double dt_max = op.cfl_rate() > 0.0 ? opts.cfl / op.cfl_rate() : -end;

  BrsResult res{l, 0, !opts.converge, 0.0};
  std::vector<double>& v = res.value.v;
  std::vector<double> k1(v.size()), stage(v.size()), k2(v.size());
  double t = 0.0;
  while (t > end * (1.0 - 1e-12)) {
    const double dt = std::min(dt_max, t - end);
    op.rate(v, k1);
    for (std::size_t i = 0; i < v.size(); ++i) stage[i] = v[i] + dt * k1[i];
    op.rate(stage, k2);
    double change = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      double next = 0.5 * (v[i] + stage[i] + dt * k2[i]);
      next = opts.set == SetMode::Reach ? std::min(next, v[i]) : std::max(l.v[i], next);
      // Values far outside the set can keep growing without affecting it;
      // convergence is judged where the sublevel set is decided.
      if (next <= 0.0 || v[i] <= 0.0) change = std::max(change, std::abs(next - v[i]));
      v[i] = next;
    }
    t -= dt;
    ++res.steps;
    res.last_change_rate = change / dt;
    if (opts.converge && res.last_change_rate < opts.conv_tol) {
      res.converged = true;
      break;
    }
  }
  res.value.time = t;
  return res;
}

std::size_t Mask::count() const { return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), 1)); }

Mask safe_set(const ValueGrid& brs, const ValueGrid& target) {
  if (!(brs.grid == target.grid) || brs.v.size() != target.v.size())
    throw Error(ErrorCode::GridMismatch, "value grid and target sampled on different grids");
  Mask m{brs.grid, std::vector<std::uint8_t>(brs.v.size(), 0)};
  for (std::size_t i = 0; i < brs.v.size(); ++i) m.cells[i] = (brs.v[i] <= 0.0 && target.v[i] <= 0.0) ? 1 : 0;
  return m;
}

Mask safe_set(const ValueGrid& brs, const TargetSet& target) {
  return safe_set(brs, signed_target(brs.grid, target));
}

void write_value_grid(std::ostream& os, const ValueGrid& v) {
  os << std::setprecision(17) << "robustroa-value-grid 1\n"
     << "lo " << v.grid.lo[0] << ' ' << v.grid.lo[1] << '\n'
     << "hi " << v.grid.hi[0] << ' ' << v.grid.hi[1] << '\n'
     << "n " << v.grid.n[0] << ' ' << v.grid.n[1] << '\n'
     << "time " << v.time << '\n';
  for (std::size_t i = 0; i < v.grid.n[0]; ++i) {
    for (std::size_t j = 0; j < v.grid.n[1]; ++j) os << (j ? " " : "") << v.at(i, j);
    os << '\n';
  }
}

ValueGrid read_value_grid(std::istream& is) {
  auto fail = [](const char* what) { return Error(ErrorCode::ConfigError, std::string("value grid: ") + what); };
  std::string tag, key;
  int version = 0;
  if (!(is >> tag >> version) || tag != "robustroa-value-grid" || version != 1) throw fail("bad header");
  ValueGrid v;
  if (!(is >> key >> v.grid.lo[0] >> v.grid.lo[1]) || key != "lo") throw fail("missing lo");
  if (!(is >> key >> v.grid.hi[0] >> v.grid.hi[1]) || key != "hi") throw fail("missing hi");
  if (!(is >> key >> v.grid.n[0] >> v.grid.n[1]) || key != "n") throw fail("missing n");
  if (!(is >> key >> v.time) || key != "time") throw fail("missing time");
  try {
    v.grid.validate();
  } catch (const Error&) {
    throw fail("invalid grid");
  }
  v.v.resize(v.grid.size());
  for (double& x : v.v)
    if (!(is >> x)) throw fail("truncated values");
  return v;
}

}  // namespace robustroa::hj
