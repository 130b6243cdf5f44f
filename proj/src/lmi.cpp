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

#include "robustroa/lmi.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "robustroa/error.hpp"

namespace robustroa::lmi {

using linalg::DenseMatrix;

SymMatrix AffineSdp::evaluate(const Vector& x) const {
  SymMatrix f = f0;
  for (std::size_t i = 0; i < num_vars; ++i) {
    if (x[i] == 0.0) continue;
    const auto src = fi[i].data();
    auto dst = f.data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += x[i] * src[k];
  }
  return f;
}

double AffineSdp::objective_value(const Vector& x) const { return linalg::dot(objective, x); }

void AffineSdp::validate() const {
  if (objective.size() != num_vars || fi.size() != num_vars)
    throw Error(ErrorCode::DimensionMismatch, "objective/fi length must equal num_vars");
  if (!f0.is_square()) throw Error(ErrorCode::DimensionMismatch, "F0 must be square");
  if (!linalg::is_symmetric(f0)) throw Error(ErrorCode::NotSymmetric, "F0");
  for (const auto& f : fi) {
    if (f.rows() != f0.rows() || f.cols() != f0.cols())
      throw Error(ErrorCode::DimensionMismatch, "Fi dimension differs from F0");
    if (!linalg::is_symmetric(f)) throw Error(ErrorCode::NotSymmetric, "Fi");
  }
  if (!(margin > 0.0)) throw Error(ErrorCode::InvalidArgument, "margin must be positive");
}

AffineSdp block_diag(const AffineSdp& a, const AffineSdp& b) {
  if (a.num_vars != b.num_vars || a.fi.size() != b.fi.size())
    throw Error(ErrorCode::DimensionMismatch, "block_diag: variable counts differ");
  const std::size_t na = a.block_dim(), nb = b.block_dim();
  auto stack = [&](const SymMatrix& fa, const SymMatrix& fb) {
    SymMatrix out(na + nb, na + nb);
    out.set_block(0, 0, fa);
    out.set_block(na, na, fb);
    return out;
  };
  AffineSdp out;
  out.num_vars = a.num_vars;
  out.objective = a.objective;
  out.margin = a.margin;
  out.f0 = stack(a.f0, b.f0);
  out.fi.reserve(a.fi.size());
  for (std::size_t i = 0; i < a.fi.size(); ++i) out.fi.push_back(stack(a.fi[i], b.fi[i]));
  return out;
}

double default_margin(const SymMatrix& f0) { return 1e-7 * (1.0 + f0.norm_inf()); }

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::IterationLimit: return "IterationLimit";
  }
  return "?";
}

namespace {

/// Slack S(x) = -F(x) - margin·I; the barrier domain is S ≻ 0.
SymMatrix slack(const AffineSdp& p, const Vector& x) {
  SymMatrix s = -p.evaluate(x);
  for (std::size_t i = 0; i < s.rows(); ++i) s(i, i) -= p.margin;
  return s;
}

double log_det_from_cholesky(const DenseMatrix& l) {
  double acc = 0.0;
  for (std::size_t i = 0; i < l.rows(); ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

/// φ(x) = -t·cᵀx - log det S(x); nullopt outside the domain.
std::optional<double> barrier_value(const AffineSdp& p, const Vector& x, double t) {
  const auto l = linalg::try_cholesky(slack(p, x));
  if (!l) return std::nullopt;
  return -t * p.objective_value(x) - log_det_from_cholesky(*l);
}

enum class CenterResult { Converged, Stopped, Stalled, NewtonLimit };

/// Damped Newton on φ for a fixed t. `stop` is polled after each accepted
/// step and ends the centering early when it returns true.
CenterResult center(const AffineSdp& p, Vector& x, double t, const SdpOptions& opt,
                    int& newton_steps, const std::function<bool(const Vector&)>& stop) {
  const std::size_t nv = p.num_vars;
  const std::size_t dim = p.block_dim();
  std::vector<DenseMatrix> w(nv);
  std::vector<DenseMatrix> wt(nv);

  for (int it = 0; it < opt.max_newton_per_center; ++it) {
    const auto l = linalg::try_cholesky(slack(p, x));
    if (!l) throw Error(ErrorCode::NonFinite, "iterate left the barrier domain");
    const SymMatrix s_inv = linalg::cholesky_inverse(*l);
    const double phi = -t * p.objective_value(x) - log_det_from_cholesky(*l);

    Vector grad(nv);
    for (std::size_t i = 0; i < nv; ++i) {
      w[i] = s_inv * p.fi[i];
      wt[i] = w[i].transpose();
      grad[i] = -t * p.objective[i] + w[i].trace();
    }
    DenseMatrix hess(nv, nv);
    for (std::size_t i = 0; i < nv; ++i) {
      const auto wi = w[i].data();
      for (std::size_t j = i; j < nv; ++j) {
        const auto wj = wt[j].data();
        double acc = 0.0;
        for (std::size_t k = 0; k < dim * dim; ++k) acc += wi[k] * wj[k];
        hess(i, j) = acc;
        hess(j, i) = acc;
      }
    }

    // A redundant parameterisation leaves H singular; a relative ridge keeps
    // the Newton direction a descent direction.
    std::optional<DenseMatrix> hl = linalg::try_cholesky(hess);
    double ridge = 1e-12 * std::max(hess.trace() / static_cast<double>(nv), 1e-300);
    while (!hl && ridge < 1e300) {
      DenseMatrix reg = hess;
      for (std::size_t i = 0; i < nv; ++i) reg(i, i) += ridge;
      hl = linalg::try_cholesky(reg);
      ridge *= 100.0;
    }
    if (!hl) throw Error(ErrorCode::NonFinite, "barrier Hessian not factorizable");

    Vector neg_grad(nv);
    for (std::size_t i = 0; i < nv; ++i) neg_grad[i] = -grad[i];
    const Vector dx = linalg::cholesky_solve(*hl, neg_grad);
    const double slope = linalg::dot(grad, dx);
    if (-slope / 2.0 <= opt.newton_tol) return CenterResult::Converged;

    double step = 1.0;
    bool accepted = false;
    Vector trial(nv);
    while (step > 1e-16) {
      for (std::size_t i = 0; i < nv; ++i) trial[i] = x[i] + step * dx[i];
      const auto phi_trial = barrier_value(p, trial, t);
      if (phi_trial && *phi_trial <= phi + opt.armijo_slope * step * slope) {
        accepted = true;
        break;
      }
      step *= opt.backtrack;
    }
    if (!accepted) return CenterResult::Stalled;
    x = trial;
    ++newton_steps;
    if (stop && stop(x)) return CenterResult::Stopped;
  }
  return CenterResult::NewtonLimit;
}

}  // namespace

Vector find_strictly_feasible(const AffineSdp& p, const SdpOptions& opt) {
  p.validate();
  const std::size_t nv = p.num_vars;
  const std::size_t dim = p.block_dim();
  Vector x(nv, 0.0);
  const double lmax0 = linalg::max_eigenvalue(p.f0);
  if (lmax0 < -p.margin) return x;

  // Augmented program over (x, s): max -s  s.t.  F(x) - s·I ⪯ -margin·I.
  AffineSdp aug;
  aug.num_vars = nv + 1;
  aug.objective.assign(nv + 1, 0.0);
  aug.objective[nv] = -1.0;
  aug.f0 = p.f0;
  aug.fi = p.fi;
  aug.fi.push_back(-1.0 * DenseMatrix::identity(dim));
  aug.margin = p.margin;

  Vector z(nv + 1, 0.0);
  z[nv] = lmax0 + p.margin + 1.0;

  const auto feasible = [&](const Vector& v) { return v[nv] < 0.0; };
  int steps = 0;
  double t = opt.t0;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    const auto res = center(aug, z, t, opt, steps, feasible);
    if (res == CenterResult::Stopped || feasible(z)) {
      Vector out(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(nv));
      if (linalg::max_eigenvalue(p.evaluate(out)) < -p.margin) return out;
    }
    if (static_cast<double>(dim) / t < opt.gap_tol) break;
    t *= opt.growth;
  }
  throw Error(ErrorCode::Infeasible,
              "minimal slack " + std::to_string(z[nv]) + " is not below zero");
}

SdpSolution maximize(const AffineSdp& p, const SdpOptions& opt) {
  SdpSolution sol;
  try {
    sol.x = find_strictly_feasible(p, opt);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Infeasible) throw;
    sol.status = SdpStatus::Infeasible;
    sol.x.assign(p.num_vars, 0.0);
    sol.objective_value = p.objective_value(sol.x);
    sol.max_block_eig = linalg::max_eigenvalue(p.evaluate(sol.x));
    return sol;
  }

  const double dim = static_cast<double>(p.block_dim());
  double t = opt.t0;
  sol.status = SdpStatus::IterationLimit;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    Vector candidate = sol.x;
    CenterResult res;
    try {
      res = center(p, candidate, t, opt, sol.iterations, {});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonFinite) throw;
      break;
    }
    if (!std::all_of(candidate.begin(), candidate.end(), [](double v) { return std::isfinite(v); }))
      break;
    sol.x = std::move(candidate);
    sol.objective_history.push_back(p.objective_value(sol.x));
    if (dim / t < opt.gap_tol && res != CenterResult::NewtonLimit) {
      sol.status = SdpStatus::Optimal;
      break;
    }
    t *= opt.growth;
  }
  sol.objective_value = p.objective_value(sol.x);
  sol.max_block_eig = linalg::max_eigenvalue(p.evaluate(sol.x));
  if (sol.status == SdpStatus::Optimal && !(sol.max_block_eig < -p.margin))
    sol.status = SdpStatus::IterationLimit;
  return sol;
}

}  // namespace robustroa::lmi
