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
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

namespace robustroa::linalg {

using Vector = std::vector<double>;

/// Row-major dense real matrix. Every matrix in this project is small
/// (at most a few dozen rows), so storage is a flat std::vector.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static DenseMatrix diag(std::span<const double> entries);
  static DenseMatrix column(std::span<const double> entries);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  DenseMatrix transpose() const;
  DenseMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
  void set_block(std::size_t r0, std::size_t c0, const DenseMatrix& b);

  double trace() const;
  /// Maximum absolute row sum.
  double norm_inf() const;
  double max_abs() const;
  bool all_finite() const;

  DenseMatrix& operator+=(const DenseMatrix& o);
  DenseMatrix& operator-=(const DenseMatrix& o);
  DenseMatrix& operator*=(double s);

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Symmetric matrices share the dense representation; operations taking a
/// SymMatrix check symmetry themselves.
using SymMatrix = DenseMatrix;

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a);
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(DenseMatrix a, double s);
DenseMatrix operator*(double s, DenseMatrix a);
Vector operator*(const DenseMatrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);
double norm_inf(std::span<const double> v);
double norm2(std::span<const double> v);

/// (m + mᵀ)/2
SymMatrix symmetrize(const DenseMatrix& m);
bool is_symmetric(const DenseMatrix& m, double rel_tol = 1e-12);

struct SymEigResult {
  Vector eigenvalues;        // ascending
  DenseMatrix eigenvectors;  // column i pairs with eigenvalues[i]
};

/// Lower-triangular L with L·Lᵀ = m. Throws NotPositiveDefinite on a
/// non-positive pivot and NotSymmetric if m is not symmetric.
DenseMatrix cholesky(const SymMatrix& m);

/// Non-throwing variant for hot loops (no symmetry check).
std::optional<DenseMatrix> try_cholesky(const SymMatrix& m);

/// Inverse of an SPD matrix from its Cholesky factor.
SymMatrix cholesky_inverse(const DenseMatrix& lower);
Vector cholesky_solve(const DenseMatrix& lower, std::span<const double> b);

/// Cyclic Jacobi eigen-decomposition.
SymEigResult sym_eig(const SymMatrix& m, int max_sweeps = 100);
double max_eigenvalue(const SymMatrix& m);

/// true iff the largest eigenvalue is below -margin.
bool is_neg_def(const SymMatrix& m, double margin);

/// LU with partial pivoting. Throws Singular when a pivot falls below
/// 1e-12·‖a‖∞.
DenseMatrix solve(const DenseMatrix& a, const DenseMatrix& b);
Vector solve(const DenseMatrix& a, std::span<const double> b);
DenseMatrix inverse(const DenseMatrix& a);
double determinant(const DenseMatrix& a);

}  // namespace robustroa::linalg
