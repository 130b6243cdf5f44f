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

#include <random>

#include "robustroa/matrix.hpp"

namespace robustroa::testing {

inline linalg::DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                                         double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  linalg::DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

inline linalg::SymMatrix random_symmetric(std::mt19937_64& rng, std::size_t n) {
  return linalg::symmetrize(random_matrix(rng, n, n));
}

inline linalg::SymMatrix random_spd(std::mt19937_64& rng, std::size_t n) {
  const auto m = random_matrix(rng, n, n);
  return m.transpose() * m + linalg::DenseMatrix::identity(n);
}

inline double max_abs_diff(const linalg::DenseMatrix& a, const linalg::DenseMatrix& b) {
  return (a - b).max_abs();
}

}  // namespace robustroa::testing
