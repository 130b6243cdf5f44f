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

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "robustroa/matrix.hpp"

namespace robustroa::hj {

using Point2 = std::array<double, 2>;

/// Uniform node-centred grid over [lo, hi] with n nodes per axis.
struct Grid2 {
  Point2 lo{-1.0, -1.0};
  Point2 hi{1.0, 1.0};
  std::array<std::size_t, 2> n{101, 101};

  double spacing(int d) const { return (hi[d] - lo[d]) / static_cast<double>(n[d] - 1); }
  double coord(int d, std::size_t i) const { return lo[d] + spacing(d) * static_cast<double>(i); }
  Point2 node(std::size_t i, std::size_t j) const { return {coord(0, i), coord(1, j)}; }
  std::size_t index(std::size_t i, std::size_t j) const { return i * n[1] + j; }
  std::size_t size() const { return n[0] * n[1]; }
  bool contains(const Point2& x) const;
  /// Throws InvalidArgument.
  void validate() const;

  bool operator==(const Grid2&) const = default;
};

enum class TargetKind { Box, Ellipse };

/// Target set T = {x : l(x) ≤ 0}.
///
/// Box: l is the signed Euclidean distance to the box boundary.
/// Ellipse: l(x) = (x-c)ᵀP(x-c) - level.
struct TargetSet {
  TargetKind kind = TargetKind::Box;
  Point2 center{0.0, 0.0};
  Point2 half_width{0.0, 0.0};
  linalg::SymMatrix p = linalg::DenseMatrix::identity(2);
  double level = 0.0;

  static TargetSet box(Point2 center, Point2 half_width);
  static TargetSet ellipse(Point2 center, linalg::SymMatrix p, double level);

  /// A box with a non-positive half-width or an ellipse with level ≤ 0.
  bool empty() const;
  double eval(const Point2& x) const;
  /// Axis-aligned half extents of the set.
  Point2 extent() const;
};

/// 101×101 (or n×n) grid over a box four times the target's half extents.
Grid2 default_grid(const TargetSet& target, std::size_t n = 101);

struct ValueGrid {
  Grid2 grid;
  std::vector<double> v;
  double time = 0.0;

  double at(std::size_t i, std::size_t j) const { return v[grid.index(i, j)]; }
  /// Bilinear interpolation. Throws OutOfGrid.
  double interpolate(const Point2& x) const;
  /// Rows "x1,x2,V".
  std::string to_csv() const;
};

/// l sampled at the grid nodes. Throws TargetOutsideGrid if the target's
/// centre is not inside the grid.
ValueGrid signed_target(const Grid2& grid, const TargetSet& target);

/// Dynamics terms of one scenario at a point:
///   ẋ = drift + Σₖ g[k]·uₖ + Σⱼ d[j]·wⱼ
struct AffineTerms {
  Point2 drift{0.0, 0.0};
  std::vector<Point2> g;
  std::vector<Point2> d;
};

/// Control-affine planar dynamics with box inputs, box disturbances and a
/// finite set of parameter scenarios chosen by the adversary.
struct AffineDynamics2 {
  std::vector<double> u_lo, u_hi;
  std::vector<double> w_lo, w_hi;
  std::vector<std::function<AffineTerms(const Point2&)>> scenarios;

  std::size_t num_inputs() const { return u_lo.size(); }
  std::size_t num_disturbances() const { return w_lo.size(); }
  /// Throws InvalidArgument. With more than one scenario at most one input
  /// is supported.
  void validate() const;
};

/// ControlMinimizes: H = min_u max_{w,θ} p·f.
/// Literal: H = max_u min_{w,θ} p·f.
enum class GameMode { ControlMinimizes, Literal };

/// Reach: V ← min(V_new, V_old), R = {V ≤ 0} only grows.
/// Invariance: V ← max(l, V_new), {V ≤ 0} is the set that can be kept in T.
enum class SetMode { Reach, Invariance };

const char* to_string(GameMode m);
const char* to_string(SetMode m);

double hamiltonian(const AffineDynamics2& dyn, const Point2& x, const Point2& p,
                   GameMode mode = GameMode::ControlMinimizes);

/// Lax-Friedrichs operator with the dynamics terms cached per node.
class LfOperator {
 public:
  LfOperator(const Grid2& grid, const AffineDynamics2& dyn,
             GameMode mode = GameMode::ControlMinimizes);

  const Grid2& grid() const { return grid_; }
  GameMode mode() const { return mode_; }
  /// Σᵢ max_x αᵢ(x)/hᵢ; a step is stable for dt·cfl_rate() ≤ 0.9.
  double cfl_rate() const { return cfl_rate_; }
  /// Local dissipation coefficients at a node.
  Point2 alpha(std::size_t node) const;

  /// dV/dτ (τ = -t) at every node. The parallel and serial versions give
  /// bitwise identical results.
  void rate(const std::vector<double>& v, std::vector<double>& out) const;
  void rate_serial(const std::vector<double>& v, std::vector<double>& out) const;

 private:
  double node_rate(const std::vector<double>& v, std::size_t i, std::size_t j) const;

  Grid2 grid_;
  GameMode mode_;
  std::size_t num_scenarios_ = 0;
  std::size_t m_ = 0;
  std::size_t q_ = 0;
  std::vector<double> u_lo_, u_hi_, w_lo_, w_hi_;
  // Per node, per scenario: drift(2), g(2·m), d(2·q).
  std::vector<double> terms_;
  std::vector<double> alpha_;
  double cfl_rate_ = 0.0;
};

inline constexpr double kMaxCfl = 0.9;

/// One explicit Euler step backward in time by dt (OpenMP over nodes).
/// Throws CflViolation.
ValueGrid lf_step(const LfOperator& op, const ValueGrid& v, double dt);
/// Single-threaded reference for lf_step.
ValueGrid lf_step_serial(const LfOperator& op, const ValueGrid& v, double dt);

struct BrsOptions {
  /// Final time t₀ < 0. Ignored when converge is set.
  double horizon = -1.0;
  /// Integrate until the sup-norm change rate over nodes with V ≤ 0 (before
  /// or after the step) drops below conv_tol, or t reaches -max_time.
  bool converge = false;
  double conv_tol = 1e-4;
  double max_time = 10.0;
  double cfl = 0.8;
  GameMode game = GameMode::ControlMinimizes;
  SetMode set = SetMode::Reach;
};

struct BrsResult {
  ValueGrid value;
  std::size_t steps = 0;
  /// False when convergence was requested and not reached by -max_time.
  bool converged = true;
  double last_change_rate = 0.0;
};

/// Integrates the HJ PDE from 0 to the horizon with TVD-RK2.
/// Throws CflViolation, TargetOutsideGrid, InvalidArgument.
BrsResult solve_brs(const Grid2& grid, const TargetSet& target, const AffineDynamics2& dyn,
                    const BrsOptions& opts);

struct Mask {
  Grid2 grid;
  std::vector<std::uint8_t> cells;

  bool at(std::size_t i, std::size_t j) const { return cells[grid.index(i, j)] != 0; }
  std::size_t count() const;
};

/// {V ≤ 0} ∩ {l ≤ 0}. Throws GridMismatch.
Mask safe_set(const ValueGrid& brs, const ValueGrid& target);
Mask safe_set(const ValueGrid& brs, const TargetSet& target);

/// Plain-text value grid:
///   robustroa-value-grid 1
///   lo <x1> <x2>
///   hi <x1> <x2>
///   n <n1> <n2>
///   time <t>
///   followed by n1·n2 values, x2 fastest.
void write_value_grid(std::ostream& os, const ValueGrid& v);
/// Throws ConfigError.
ValueGrid read_value_grid(std::istream& is);

}  // namespace robustroa::hj
