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

#include <functional>
#include <optional>
#include <vector>

#include "robustroa/matrix.hpp"

namespace robustroa::mpc {

using linalg::DenseMatrix;
using linalg::SymMatrix;
using linalg::Vector;

struct Box {
  Vector lo;
  Vector hi;

  bool contains(std::span<const double> v) const;
  Vector clamp(Vector v) const;
};

/// Continuous-time dynamics ẋ = f(x, u) seen by the controller.
struct DynamicsHandle {
  std::size_t num_states = 0;
  std::size_t num_inputs = 0;
  std::function<Vector(const Vector& x, const Vector& u)> f;
};

struct MpcConfig {
  SymMatrix q;  // diagonal, n×n
  SymMatrix r;  // diagonal, m×m
  double dt = 0.05;
  int horizon = 2;
  std::optional<Box> u_bounds;
  std::optional<Box> x_bounds;

  void validate(std::size_t n, std::size_t m) const;
};

struct MpcResult {
  Vector u0;        // first control, absolute and clamped to the input box
  Vector du0;       // unclamped deviation from the reference control
  std::vector<Vector> predicted;  // horizon+1 states, absolute
  double cost = 0.0;              // condensed quadratic at the optimum
  double stationarity = 0.0;      // ‖∇J(δu*)‖
  bool regularized = false;       // R had zero entries and a ridge was added
  bool state_violation = false;   // some predicted state left x_bounds
};

/// Jacobians of f at (x, u) by central differences.
std::pair<DenseMatrix, DenseMatrix> linearize(const DynamicsHandle& model, const Vector& x,
                                              const Vector& u);

/// One receding-horizon solve. The model is linearized about the reference
/// (x_ref[i], u_ref[i]) and Euler-discretized with cfg.dt; the cost is
///   Σ_{i=1..k} ‖x_i - x_ref[i]‖²_Q + Σ_{i=0..k-1} ‖u_i - u_ref[i]‖²_R.
/// x_ref holds k+1 states (index 0 is the current reference), u_ref holds k
/// controls. Throws SingularHessian when the condensed Hessian cannot be
/// factorized.
MpcResult mpc_step(const DynamicsHandle& model, const Vector& x_now,
                   const std::vector<Vector>& x_ref, const std::vector<Vector>& u_ref,
                   const MpcConfig& cfg);

}  // namespace robustroa::mpc
