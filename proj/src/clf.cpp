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

#include "robustroa/clf.hpp"

#include <cmath>

#include "robustroa/error.hpp"

namespace robustroa::clf {

namespace {

void require_shape(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, what);
}

void require_positive_diagonal(const SymMatrix& m, const char* name) {
  if (!m.is_square()) throw Error(ErrorCode::DimensionMismatch, std::string(name) + " not square");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (i == j && !(m(i, i) > 0.0))
        throw Error(ErrorCode::InvalidArgument, std::string(name) + " needs positive diagonal");
      if (i != j && m(i, j) != 0.0)
        throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be diagonal");
    }
}

DenseMatrix diagonal_reciprocal(const SymMatrix& m) {
  DenseMatrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) out(i, i) = 1.0 / m(i, i);
  return out;
}

}  // namespace

void LinearModel::validate() const {
  const std::size_t n = a.rows();
  require_shape(a.is_square(), "A must be square");
  require_shape(b.rows() == n, "B rows must equal state dimension");
  require_shape(b_w.rows() == n, "B_w rows must equal state dimension");
  require_shape(g.rows() == n && g.cols() == 1, "G must be n×1");
  if (!a.all_finite() || !b.all_finite() || !b_w.all_finite() || !g.all_finite())
    throw Error(ErrorCode::NonFinite, "linear model entries");
}

void ClfParams::validate() const {
  require_positive_diagonal(q, "Q");
  require_positive_diagonal(r, "R");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "mu must be positive");
}

double ClfCertificate::lyapunov(std::span<const double> e) const {
  return linalg::dot(e, p * e);
}

void ClfCertificate::set_w_max(double w) {
  w_max = w;
  roa_level = clf::roa_level(params, w);
}

std::size_t Lemma2Layout::y_index(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  // Row i of the upper triangle starts after rows 0..i-1 of lengths n, n-1, ...
  return i * n - i * (i - 1) / 2 + (j - i);
}

SymMatrix Lemma2Layout::unpack_y(std::span<const double> x) const {
  SymMatrix y(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) y(i, j) = y(j, i) = x[y_index(i, j)];
  return y;
}

DenseMatrix Lemma2Layout::unpack_l(std::span<const double> x) const {
  DenseMatrix l(m, n);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) l(r, c) = x[l_index(r, c)];
  return l;
}

lmi::AffineSdp build_lemma2_lmi(const LinearModel& model, const ClfParams& params) {
  model.validate();
  params.validate();
  const std::size_t n = model.num_states();
  const std::size_t m = model.num_inputs();
  const std::size_t p = model.num_disturbances();
  require_shape(params.q.rows() == n, "Q must be n×n");
  require_shape(params.r.rows() == m, "R must be m×m");

  const Lemma2Layout layout{n, m, p};
  const std::size_t dim = layout.block_dim();
  const std::size_t row_y = n, row_l = 2 * n, row_w = 2 * n + m;

  lmi::AffineSdp sdp;
  sdp.num_vars = layout.num_vars();
  sdp.objective.assign(sdp.num_vars, 0.0);
  sdp.f0 = SymMatrix(dim, dim);
  sdp.f0.set_block(row_y, row_y, -diagonal_reciprocal(params.q));
  sdp.f0.set_block(row_l, row_l, -diagonal_reciprocal(params.r));
  sdp.f0.set_block(row_w, row_w, -params.mu * DenseMatrix::identity(p));
  sdp.f0.set_block(0, row_w, model.b_w);
  sdp.f0.set_block(row_w, 0, model.b_w.transpose());

  sdp.fi.assign(sdp.num_vars, SymMatrix(dim, dim));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      DenseMatrix e(n, n);
      e(i, j) = e(j, i) = 1.0;
      const DenseMatrix ae = model.a * e;
      auto& f = sdp.fi[layout.y_index(i, j)];
      f.set_block(0, 0, ae.transpose() + ae + params.lambda * e);
      f.set_block(0, row_y, e);  // Yᵀ
      f.set_block(row_y, 0, e);  // Y
      if (i == j) sdp.objective[layout.y_index(i, j)] = 1.0;
    }
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      DenseMatrix e(m, n);
      e(r, c) = 1.0;
      const DenseMatrix be = model.b * e;
      auto& f = sdp.fi[layout.l_index(r, c)];
      f.set_block(0, 0, be.transpose() + be);
      f.set_block(0, row_l, e.transpose());  // Lᵀ
      f.set_block(row_l, 0, e);              // L
    }
  sdp.margin = lmi::default_margin(sdp.f0);
  return sdp;
}

lmi::AffineSdp build_synthesis_lmi(const LinearModel& model, const ClfParams& params) {
  const lmi::AffineSdp block = build_lemma2_lmi(model, params);
  const std::size_t n = model.num_states();
  const Lemma2Layout layout{n, model.num_inputs(), model.num_disturbances()};
  lmi::AffineSdp neg_y;
  neg_y.num_vars = block.num_vars;
  neg_y.objective = block.objective;
  neg_y.f0 = SymMatrix(n, n);
  neg_y.fi.assign(block.num_vars, SymMatrix(n, n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      auto& f = neg_y.fi[layout.y_index(i, j)];
      f(i, j) = -1.0;
      f(j, i) = -1.0;
    }
  neg_y.margin = block.margin;
  return lmi::block_diag(block, neg_y);
}

std::pair<DenseMatrix, SymMatrix> recover_gains(const SymMatrix& y, const DenseMatrix& l) {
  require_shape(y.is_square() && l.cols() == y.rows(), "recover_gains shapes");
  const DenseMatrix y_inv = linalg::inverse(y);
  SymMatrix p = 0.5 * (y_inv + y_inv.transpose());
  DenseMatrix k = l * y_inv;
  return {std::move(k), std::move(p)};
}

double verify_closed_loop(const LinearModel& model, const ClfCertificate& cert) {
  const auto& par = cert.params;
  const DenseMatrix acl = model.a + model.b * cert.k;
  const DenseMatrix pbw = cert.p * model.b_w;
  const SymMatrix m = acl.transpose() * cert.p + cert.p * acl + par.lambda * cert.p + par.q +
                      cert.k.transpose() * par.r * cert.k +
                      (1.0 / par.mu) * (pbw * pbw.transpose());
  return linalg::max_eigenvalue(linalg::symmetrize(m));
}

double roa_level(const ClfParams& params, double w_max) {
  if (w_max < 0.0) throw Error(ErrorCode::InvalidArgument, "w_max must be non-negative");
  return params.mu * w_max * w_max / params.lambda;
}

SynthesisResult synthesize(const LinearModel& model, const ClfParams& params,
                           const lmi::SdpOptions& options) {
  const lmi::AffineSdp sdp = build_synthesis_lmi(model, params);
  SynthesisResult out;
  out.sdp = lmi::maximize(sdp, options);
  out.block_max_eig = out.sdp.max_block_eig;
  if (out.sdp.status != lmi::SdpStatus::Optimal) return out;

  const Lemma2Layout layout{model.num_states(), model.num_inputs(), model.num_disturbances()};
  const SymMatrix y = layout.unpack_y(out.sdp.x);
  const DenseMatrix l = layout.unpack_l(out.sdp.x);
  auto [k, p] = recover_gains(y, l);
  linalg::cholesky(p);  // P ≻ 0 or NotPositiveDefinite

  ClfCertificate cert{std::move(k), std::move(p), params, std::nullopt, 0.0};
  out.certificate_max_eig = verify_closed_loop(model, cert);
  out.certificate = std::move(cert);
  return out;
}

}  // namespace robustroa::clf
