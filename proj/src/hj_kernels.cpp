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

#include <cstddef>
#include <vector>

#include "hj_detail.hpp"
#include "robustroa/error.hpp"
#include "robustroa/hj.hpp"

namespace robustroa::hj {

double LfOperator::node_rate(const std::vector<double>& v, std::size_t i, std::size_t j) const {
  const std::size_t node = grid_.index(i, j);
  const std::size_t idx[2] = {i, j};
  const std::size_t step[2] = {grid_.n[1], 1};
  double p[2];
  double diss = 0.0;
  for (int d = 0; d < 2; ++d) {
    const double h = grid_.spacing(d);
    const double c = v[node];
    // One-sided extrapolation at the edges makes D⁻ = D⁺ there.
    double dp, dm;
    if (idx[d] == 0) {
      dp = dm = (v[node + step[d]] - c) / h;
    } else if (idx[d] == grid_.n[d] - 1) {
      dp = dm = (c - v[node - step[d]]) / h;
    } else {
      dp = (v[node + step[d]] - c) / h;
      dm = (c - v[node - step[d]]) / h;
    }
    p[d] = 0.5 * (dp + dm);
    diss += alpha_[2 * node + d] * 0.5 * (dp - dm);
  }

  const bool literal = mode_ == GameMode::Literal;
  const std::size_t stride = 2 + 2 * m_ + 2 * q_;
  detail::Lines lines;
  for (std::size_t s = 0; s < num_scenarios_; ++s) {
    const double* t = &terms_[(node * num_scenarios_ + s) * stride];
    detail::add_line(lines, t, t + 2, t + 2 + 2 * m_, m_, q_, w_lo_.data(), w_hi_.data(), p[0], p[1],
                     literal);
  }
  return detail::combine(lines, u_lo_.data(), u_hi_.data(), literal) + diss;
}

void LfOperator::rate(const std::vector<double>& v, std::vector<double>& out) const {
  if (v.size() != grid_.size()) throw Error(ErrorCode::GridMismatch, "value vector size");
  out.resize(v.size());
  const auto n0 = static_cast<long>(grid_.n[0]);
  const std::size_t n1 = grid_.n[1];
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n0; ++i)
    for (std::size_t j = 0; j < n1; ++j)
      out[grid_.index(static_cast<std::size_t>(i), j)] = node_rate(v, static_cast<std::size_t>(i), j);
}

void LfOperator::rate_serial(const std::vector<double>& v, std::vector<double>& out) const {
  if (v.size() != grid_.size()) throw Error(ErrorCode::GridMismatch, "value vector size");
  out.resize(v.size());
  for (std::size_t i = 0; i < grid_.n[0]; ++i)
    for (std::size_t j = 0; j < grid_.n[1]; ++j) out[grid_.index(i, j)] = node_rate(v, i, j);
}

namespace {

template <class Rate>
ValueGrid euler_step(const LfOperator& op, const ValueGrid& v, double dt, Rate rate) {
  if (!(v.grid == op.grid())) throw Error(ErrorCode::GridMismatch, "value grid does not match operator");
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
  if (dt * op.cfl_rate() > kMaxCfl * (1.0 + 1e-12))
    throw Error(ErrorCode::CflViolation, "time step exceeds the CFL limit");
  std::vector<double> r;
  rate(v.v, r);
  ValueGrid out{v.grid, v.v, v.time - dt};
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += dt * r[i];
  return out;
}

}  // namespace

ValueGrid lf_step(const LfOperator& op, const ValueGrid& v, double dt) {
  return euler_step(op, v, dt, [&](const std::vector<double>& x, std::vector<double>& r) { op.rate(x, r); });
}

ValueGrid lf_step_serial(const LfOperator& op, const ValueGrid& v, double dt) {
  return euler_step(op, v, dt,
                    [&](const std::vector<double>& x, std::vector<double>& r) { op.rate_serial(x, r); });
}

}  // namespace robustroa::hj
