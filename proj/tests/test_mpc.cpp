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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "robustroa/error.hpp"
#include "robustroa/mpc.hpp"

using namespace robustroa;
using namespace robustroa::mpc;
using linalg::DenseMatrix;

namespace {

DynamicsHandle scalar_linear(double a, double b) {
  return {1, 1, [a, b](const Vector& x, const Vector& u) { return Vector{a * x[0] + b * u[0]}; }};
}

MpcConfig scalar_config(double q, double r, double dt, int k) {
  MpcConfig c;
  c.q = DenseMatrix{{q}};
  c.r = DenseMatrix{{r}};
  c.dt = dt;
  c.horizon = k;
  return c;
}

std::vector<Vector> zeros(std::size_t count, std::size_t dim) { return std::vector<Vector>(count, Vector(dim, 0.0)); }

/// Cost of the Euler-discretized scalar problem written out by hand.
double scalar_cost(double a, double b, double q, double r, double dt, double x0, double u0, double u1) {
  const double x1 = x0 + dt * (a * x0 + b * u0);
  const double x2 = x1 + dt * (a * x1 + b * u1);
  return q * (x1 * x1 + x2 * x2) + r * (u0 * u0 + u1 * u1);
}

struct GridMin {
  double u0, u1, cost;
};

GridMin grid_search(const std::function<double(double, double)>& j, double c0, double c1, double half,
                    double step) {
  GridMin best{c0, c1, std::numeric_limits<double>::infinity()};
  const int n = static_cast<int>(std::round(half / step));
  for (int i = -n; i <= n; ++i)
    for (int k = -n; k <= n; ++k) {
      const double u0 = c0 + i * step, u1 = c1 + k * step;
      const double v = j(u0, u1);
      if (v < best.cost) best = {u0, u1, v};
    }
  return best;
}

}  // namespace

TEST_CASE("one-step deadbeat") {
  const auto model = scalar_linear(0.0, 1.0);
  for (double x : {1.0, -0.3, 2.5}) {
    const auto r = mpc_step(model, {x}, zeros(2, 1), zeros(1, 1), scalar_config(1.0, 0.0, 0.05, 1));
    CHECK(r.regularized);
    CHECK(r.u0[0] == doctest::Approx(-x / 0.05).epsilon(1e-6));
    CHECK(std::abs(r.predicted[1][0]) < 1e-6 * std::abs(x));
  }
}

TEST_CASE("two-step scalar problem against a brute-force grid") {
  const double a = 0.5, b = 1.0, q = 1.0, r = 0.1, dt = 0.1;
  for (double x0 : {1.0, -2.0, 0.4}) {
    const auto res = mpc_step(scalar_linear(a, b), {x0}, zeros(3, 1), zeros(2, 1), scalar_config(q, r, dt, 2));
    const auto j = [&](double u0, double u1) { return scalar_cost(a, b, q, r, dt, x0, u0, u1); };
    // Coarse 1e-2 sweep, then a 1e-4 sweep around the coarse minimum.
    const auto coarse = grid_search(j, 0.0, 0.0, 10.0, 1e-2);
    const auto fine = grid_search(j, coarse.u0, coarse.u1, 0.02, 1e-4);
    CHECK(std::abs(res.u0[0] - fine.u0) < 1e-3);
    CHECK(res.cost <= fine.cost + 1e-9);
    CHECK(res.stationarity < 1e-9);
  }
}

TEST_CASE("optimal cost grows with the horizon") {
  const auto model = scalar_linear(0.3, 1.0);
  double prev = 0.0;
  for (int k = 1; k <= 6; ++k) {
    const auto r = mpc_step(model, {1.0}, zeros(k + 1, 1), zeros(k, 1), scalar_config(1.0, 0.5, 0.1, k));
    CHECK(r.cost >= prev - 1e-12);
    prev = r.cost;
  }
}

TEST_CASE("on-reference state needs no correction") {
  // ẋ₁ = x₂, ẋ₂ = u - g, reference hovering at rest with u_ref = g.
  const double g = 9.81;
  DynamicsHandle model{2, 1, [g](const Vector& x, const Vector& u) { return Vector{x[1], u[0] - g}; }};
  MpcConfig cfg;
  cfg.q = DenseMatrix::diag(std::vector{10.0, 1.0});
  cfg.r = DenseMatrix{{1.0}};
  cfg.horizon = 3;
  const std::vector<Vector> x_ref(4, Vector{0.5, 0.0});
  const std::vector<Vector> u_ref(3, Vector{g});
  const auto r = mpc_step(model, {0.5, 0.0}, x_ref, u_ref, cfg);
  CHECK(std::abs(r.du0[0]) < 1e-12);
  CHECK(r.u0[0] == doctest::Approx(g));
  CHECK(r.cost == doctest::Approx(0.0));
}

TEST_CASE("finite-difference linearization of a linear model") {
  DynamicsHandle model{2, 1, [](const Vector& x, const Vector& u) {
                         return Vector{2.0 * x[0] - x[1], 0.5 * x[0] + 3.0 * u[0]};
                       }};
  const auto [a, b] = linearize(model, {0.3, -1.0}, {2.0});
  CHECK(a(0, 0) == doctest::Approx(2.0));
  CHECK(a(0, 1) == doctest::Approx(-1.0));
  CHECK(a(1, 0) == doctest::Approx(0.5));
  CHECK(std::abs(a(1, 1)) < 1e-9);
  CHECK(b(1, 0) == doctest::Approx(3.0));
}

TEST_CASE("input box clamps and state box is reported") {
  auto cfg = scalar_config(1.0, 0.0, 0.05, 1);
  cfg.u_bounds = Box{{-5.0}, {5.0}};
  const auto r = mpc_step(scalar_linear(0.0, 1.0), {1.0}, zeros(2, 1), zeros(1, 1), cfg);
  CHECK(r.u0[0] == -5.0);
  CHECK(r.du0[0] == doctest::Approx(-20.0).epsilon(1e-6));

  auto cfg2 = scalar_config(1.0, 1.0, 0.05, 2);
  cfg2.x_bounds = Box{{-0.1}, {0.1}};
  const auto r2 = mpc_step(scalar_linear(0.0, 1.0), {1.0}, zeros(3, 1), zeros(2, 1), cfg2);
  CHECK(r2.state_violation);
}

TEST_CASE("invalid configurations") {
  auto cfg = scalar_config(1.0, 1.0, 0.05, 0);
  CHECK_THROWS_AS(cfg.validate(1, 1), Error);
  auto neg = scalar_config(-1.0, 1.0, 0.05, 2);
  CHECK_THROWS_AS(neg.validate(1, 1), Error);
  const auto ok = scalar_config(1.0, 1.0, 0.05, 2);
  CHECK_THROWS_AS(mpc_step(scalar_linear(0, 1), {1.0}, zeros(2, 1), zeros(2, 1), ok), Error);
  CHECK_THROWS_AS(mpc_step(scalar_linear(0, 1), {std::nan("")}, zeros(3, 1), zeros(2, 1), ok), Error);
}
