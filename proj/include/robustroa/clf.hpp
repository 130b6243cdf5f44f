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

#include <optional>
#include <utility>

#include "robustroa/lmi.hpp"
#include "robustroa/matrix.hpp"

namespace robustroa::clf {

using linalg::DenseMatrix;
using linalg::SymMatrix;

/// ẋ = A x + B u + B_w w + G
struct LinearModel {
  DenseMatrix a;
  DenseMatrix b;
  DenseMatrix b_w;
  DenseMatrix g;

  std::size_t num_states() const noexcept { return a.rows(); }
  std::size_t num_inputs() const noexcept { return b.cols(); }
  std::size_t num_disturbances() const noexcept { return b_w.cols(); }
  /// Throws DimensionMismatch or NonFinite.
  void validate() const;
};

/// Weights and decay parameters for the block LMI. q and r must be
/// diagonal with positive entries.
struct ClfParams {
  SymMatrix q;
  SymMatrix r;
  double lambda = 0.0;
  double mu = 0.0;

  void validate() const;
};

struct ClfCertificate {
  DenseMatrix k;  // m×n feedback gain, u = K e
  SymMatrix p;    // n×n, E(e) = eᵀ P e
  ClfParams params;
  std::optional<double> w_max;
  double roa_level = 0.0;

  double lyapunov(std::span<const double> e) const;
  /// Sets w_max and the matching invariant-set level μ·w²/λ.
  void set_w_max(double w);
};

/// Variables are the upper triangle of Y (row-wise) followed by L row-major.
struct Lemma2Layout {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t p = 0;

  std::size_t num_y_vars() const noexcept { return n * (n + 1) / 2; }
  std::size_t num_vars() const noexcept { return num_y_vars() + m * n; }
  std::size_t block_dim() const noexcept { return 2 * n + m + p; }
  std::size_t y_index(std::size_t i, std::size_t j) const;
  std::size_t l_index(std::size_t r, std::size_t c) const { return num_y_vars() + r * n + c; }

  SymMatrix unpack_y(std::span<const double> x) const;
  DenseMatrix unpack_l(std::span<const double> x) const;
};

/// Block LMI
///   [R11  Yᵀ    Lᵀ    B_w ]
///   [Y    -Q⁻¹  0     0   ]
///   [L    0     -R⁻¹  0   ]  ≺ 0,   R11 = (AY + BL)ᵀ + (AY + BL) + λY
///   [B_wᵀ 0     0     -μI ]
/// with objective tr(Y).
lmi::AffineSdp build_lemma2_lmi(const LinearModel& model, const ClfParams& params);

/// The CLF block together with -Y ≺ 0. The block alone admits indefinite
/// Y once λY can be made negative, so synthesis always solves this one.
lmi::AffineSdp build_synthesis_lmi(const LinearModel& model, const ClfParams& params);

/// P = sym(Y⁻¹), K = L Y⁻¹.
std::pair<DenseMatrix, SymMatrix> recover_gains(const SymMatrix& y, const DenseMatrix& l);

/// λ_max of (A+BK)ᵀP + P(A+BK) + λP + Q + KᵀRK + μ⁻¹ P B_w B_wᵀ P.
double verify_closed_loop(const LinearModel& model, const ClfCertificate& cert);

/// μ·w²/λ
double roa_level(const ClfParams& params, double w_max);

struct SynthesisResult {
  lmi::SdpSolution sdp;
  std::optional<ClfCertificate> certificate;  // set when sdp.status is Optimal
  double block_max_eig = 0.0;
  double certificate_max_eig = 0.0;
};

/// Builds and solves the block LMI, then recovers and re-checks (K, P).
SynthesisResult synthesize(const LinearModel& model, const ClfParams& params,
                           const lmi::SdpOptions& options = {});

}  // namespace robustroa::clf
