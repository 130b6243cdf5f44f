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

// Lax-Friedrichs node update: OpenMP kernel against the serial reference.

#include <benchmark/benchmark.h>

#include <random>

#include "robustroa/hj.hpp"

using namespace robustroa::hj;

namespace {

AffineDynamics2 mass_dynamics() {
  AffineDynamics2 d;
  d.u_lo = {0.0};
  d.u_hi = {200.0};
  for (double m : {12.454, 17.454})
    d.scenarios.push_back([m](const Point2& x) {
      AffineTerms t;
      t.drift = {x[1], -9.81};
      t.g = {{0.0, 1.0 / m}};
      return t;
    });
  return d;
}

ValueGrid random_values(const Grid2& g) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ValueGrid v{g, std::vector<double>(g.size()), 0.0};
  for (double& x : v.v) x = u(rng);
  return v;
}

template <bool Parallel>
void BM_LfStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Grid2 g{{-0.32, -2.0}, {0.32, 2.0}, {n, n}};
  const LfOperator op(g, mass_dynamics());
  const auto v = random_values(g);
  const double dt = 0.8 / op.cfl_rate();
  for (auto _ : state) {
    auto next = Parallel ? lf_step(op, v, dt) : lf_step_serial(op, v, dt);
    benchmark::DoNotOptimize(next.v.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * static_cast<int64_t>(g.size()));
}

}  // namespace

BENCHMARK(BM_LfStep<false>)->Name("lf_step_serial")->Arg(101)->Arg(201)->Arg(401);
BENCHMARK(BM_LfStep<true>)->Name("lf_step_openmp")->Arg(101)->Arg(201)->Arg(401);

BENCHMARK_MAIN();
