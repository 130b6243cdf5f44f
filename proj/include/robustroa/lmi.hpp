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

#include <cstddef>
#include <vector>

#include "robustroa/matrix.hpp"

namespace robustroa::lmi {

using linalg::SymMatrix;
using linalg::Vector;

/// max cᵀx  s.t.  F(x) = F₀ + Σᵢ xᵢFᵢ ⪯ -margin·I
///
/// The strict inequality F(x) ≺ 0 is enforced with the margin; a solution
/// reported Optimal always has λ_max(F(x)) < -margin.
struct AffineSdp {
  std::size_t num_vars = 0;
  Vector objective;
  SymMatrix f0;
  std::vector<SymMatrix> fi;
  double margin = 0.0;

  std::size_t block_dim() const noexcept { return f0.rows(); }
  SymMatrix evaluate(const Vector& x) const;
  double objective_value(const Vector& x) const;
  /// Throws DimensionMismatch / NotSymmetric / InvalidArgument.
  void validate() const;
};

/// diag(a(x), b(x)) over a shared variable vector; objective and margin from a.
AffineSdp block_diag(const AffineSdp& a, const AffineSdp& b);

/// 1e-7·(1 + ‖F₀‖∞)
double default_margin(const SymMatrix& f0);

enum class SdpStatus { Optimal, Infeasible, IterationLimit };

const char* to_string(SdpStatus s);

struct SdpOptions {
  double gap_tol = 1e-6;
  double t0 = 1.0;
  double growth = 10.0;
  int max_newton_per_center = 200;
  int max_outer = 60;
  double newton_tol = 1e-10;
  double armijo_slope = 0.01;
  double backtrack = 0.5;
};

struct SdpSolution {
  Vector x;
  double objective_value = 0.0;
  double max_block_eig = 0.0;
  int iterations = 0;  // total Newton steps
  SdpStatus status = SdpStatus::IterationLimit;
  /// cᵀx at the end of every centering phase.
  std::vector<double> objective_history;
};

/// Phase 1: minimise a slack s with F(x) ⪯ (s - margin)·I until s < 0.
/// Throws Infeasible when the minimal slack stays non-negative.
Vector find_strictly_feasible(const AffineSdp& p, const SdpOptions& opt = {});

/// Log-det barrier path following from a strictly feasible start. Runs phase
/// 1 itself; an infeasible program is reported with status Infeasible.
SdpSolution maximize(const AffineSdp& p, const SdpOptions& opt = {});

}  // namespace robustroa::lmi
