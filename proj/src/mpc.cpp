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

#include "robustroa/mpc.hpp"

#include <algorithm>
#include <cmath>

#include "robustroa/error.hpp"

namespace robustroa::mpc {

bool Box::contains(std::span<const double> v) const {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < lo[i] || v[i] > hi[i]) return false;
  return true;
}

Vector Box::clamp(Vector v) const {
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::clamp(v[i], lo[i], hi[i]);
  return v;
}

void MpcConfig::validate(std::size_t n, std::size_t m) const {
  if (q.rows() != n || !q.is_square() || r.rows() != m || !r.is_square())
    throw Error(ErrorCode::DimensionMismatch, "MPC weight shapes");
  if (!(dt > 0.0) || horizon < 1) throw Error(ErrorCode::InvalidArgument, "MPC dt/horizon");
  for (std::size_t i = 0; i < n; ++i)
    if (q(i, i) < 0.0) throw Error(ErrorCode::InvalidArgument, "negative Q_MPC weight");
  for (std::size_t i = 0; i < m; ++i)
    if (r(i, i) < 0.0) throw Error(ErrorCode::InvalidArgument, "negative R_MPC weight");
  if (u_bounds && (u_bounds->lo.size() != m || u_bounds->hi.size() != m))
    throw Error(ErrorCode::DimensionMismatch, "input box size");
  if (x_bounds && (x_bounds->lo.size() != n || x_bounds->hi.size() != n))
    throw Error(ErrorCode::DimensionMismatch, "state box size");
}

std::pair<DenseMatrix, DenseMatrix> linearize(const DynamicsHandle& model, const Vector& x,
                                              const Vector& u) {
  const std::size_t n = model.num_states, m = model.num_inputs;
  DenseMatrix a(n, n), b(n, m);
  auto column = [&](DenseMatrix& out, std::size_t col, Vector xp, Vector up, Vector xm, Vector um,
                    double h) {
    const Vector fp = model.f(xp, up);
    const Vector fm = model.f(xm, um);
    for (std::size_t r = 0; r < n; ++r) out(r, col) = (fp[r] - fm[r]) / (2.0 * h);
  };
  for (std::size_t j = 0; j < n; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(x[j]));
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    column(a, j, xp, u, xm, u, h);
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(u[j]));
    Vector up = u, um = u;
    up[j] += h;
    um[j] -= h;
    column(b, j, x, up, x, um, h);
  }
  return {a, b};
}

MpcResult mpc_step(const DynamicsHandle& model, const Vector& x_now,
                   const std::vector<Vector>& x_ref, const std::vector<Vector>& u_ref,
                   const MpcConfig& cfg) {
  const std::size_t n = model.num_states, m = model.num_inputs;
  const std::size_t k = static_cast<std::size_t>(cfg.horizon);
  cfg.validate(n, m);
  if (x_now.size() != n || x_ref.size() != k + 1 || u_ref.size() != k)
    throw Error(ErrorCode::DimensionMismatch, "MPC reference length");
  if (!std::all_of(x_now.begin(), x_now.end(), [](double v) { return std::isfinite(v); }))
    throw Error(ErrorCode::NonFinite, "MPC state");

  // Deviation dynamics δx_{i+1} = Φ_i δx_i + Γ_i δu_i.
  std::vector<DenseMatrix> phi(k), gam(k);
  for (std::size_t i = 0; i < k; ++i) {
    auto [a, b] = linearize(model, x_ref[i], u_ref[i]);
    phi[i] = DenseMatrix::identity(n) + cfg.dt * a;
    gam[i] = cfg.dt * b;
  }

  // Condensed prediction: δx_i = S_i δx_0 + Σ_j T_ij δu_j for i = 1..k.
  const std::size_t nu = m * k;
  DenseMatrix big_s(n * k, n);
  DenseMatrix big_t(n * k, nu);
  DenseMatrix s_prev = DenseMatrix::identity(n);
  DenseMatrix t_prev(n, nu);
  for (std::size_t i = 0; i < k; ++i) {
    DenseMatrix s_i = phi[i] * s_prev;
    DenseMatrix t_i = phi[i] * t_prev;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < m; ++c) t_i(r, i * m + c) += gam[i](r, c);
    big_s.set_block(i * n, 0, s_i);
    big_t.set_block(i * n, 0, t_i);
    s_prev = std::move(s_i);
    t_prev = std::move(t_i);
  }

  Vector dx0(n);
  for (std::size_t j = 0; j < n; ++j) dx0[j] = x_now[j] - x_ref[0][j];

  // J(δu) = ½ δuᵀ H δu + gᵀ δu + const, H = 2(TᵀQ̄T + R̄), g = 2TᵀQ̄Sδx₀.
  DenseMatrix qt(n * k, nu);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < nu; ++c) qt(i * n + r, c) = cfg.q(r, r) * big_t(i * n + r, c);
  DenseMatrix hess = 2.0 * (big_t.transpose() * qt);
  bool zero_r = false;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t c = 0; c < m; ++c) {
      hess(i * m + c, i * m + c) += 2.0 * cfg.r(c, c);
      zero_r = zero_r || cfg.r(c, c) == 0.0;
    }
  MpcResult out;
  if (zero_r) {
    const double ridge = 1e-9 * std::max(hess.trace() / static_cast<double>(nu), 1e-12);
    for (std::size_t i = 0; i < nu; ++i) hess(i, i) += ridge;
    out.regularized = true;
  }

  const Vector sx = big_s * dx0;
  Vector qsx(n * k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t r = 0; r < n; ++r) qsx[i * n + r] = cfg.q(r, r) * sx[i * n + r];
  Vector grad0 = big_t.transpose() * qsx;
  for (double& v : grad0) v *= 2.0;

  const auto chol = linalg::try_cholesky(hess);
  if (!chol) throw Error(ErrorCode::SingularHessian, "condensed MPC Hessian not positive definite");
  Vector neg(nu);
  for (std::size_t i = 0; i < nu; ++i) neg[i] = -grad0[i];
  const Vector du = linalg::cholesky_solve(*chol, neg);

  Vector residual = hess * du;
  for (std::size_t i = 0; i < nu; ++i) residual[i] += grad0[i];
  out.stationarity = linalg::norm2(residual);
  out.cost = 0.5 * linalg::dot(du, hess * du) + linalg::dot(grad0, du) + linalg::dot(sx, qsx);

  out.du0.assign(du.begin(), du.begin() + static_cast<std::ptrdiff_t>(m));
  out.u0 = u_ref[0];
  for (std::size_t c = 0; c < m; ++c) out.u0[c] += out.du0[c];
  if (cfg.u_bounds) out.u0 = cfg.u_bounds->clamp(out.u0);

  const Vector dx = big_t * du;
  out.predicted.push_back(x_now);
  for (std::size_t i = 0; i < k; ++i) {
    Vector xi = x_ref[i + 1];
    for (std::size_t r = 0; r < n; ++r) xi[r] += sx[i * n + r] + dx[i * n + r];
    if (cfg.x_bounds && !cfg.x_bounds->contains(xi)) out.state_violation = true;
    out.predicted.push_back(std::move(xi));
  }
  return out;
}

}  // namespace robustroa::mpc
