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

#include "robustroa/clf.hpp"
#include "robustroa/hj.hpp"

namespace robustroa::roa {

using hj::Point2;

/// {x : (x-center)ᵀ P (x-center) ≤ level}
struct Ellipsoid2 {
  linalg::SymMatrix p = linalg::DenseMatrix::identity(2);
  Point2 center{0.0, 0.0};
  double level = 0.0;

  /// Throws DimensionMismatch, NotPositiveDefinite, InvalidArgument.
  void validate() const;
  /// Boundary point at parameter angle theta.
  Point2 boundary(double theta) const;
};

struct ContainmentOptions {
  std::size_t samples = 720;
};

struct ContainmentReport {
  bool contained = false;
  /// min over samples of -max(V, l) - δ; positive iff contained.
  double margin = 0.0;
};

/// Samples the boundary and the centre; every sample needs V ≤ -δ and l ≤ -δ,
/// with δ half a cell of value change along each axis at that point.
/// Throws OutOfGrid, GridMismatch.
ContainmentReport check_containment(const Ellipsoid2& e, const hj::ValueGrid& brs, const hj::TargetSet& target,
                                    const ContainmentOptions& opts = {});
bool ellipsoid_contained(const Ellipsoid2& e, const hj::ValueGrid& brs, const hj::TargetSet& target,
                         const ContainmentOptions& opts = {});

struct WmaxOptions {
  double w_hi = 20.0;
  double tol = 1e-3;
  ContainmentOptions containment;
};

struct WmaxResult {
  double w_max = 0.0;
  double level = 0.0;
  double margin = 0.0;
  std::size_t iterations = 0;
  /// Containment still held at w_hi.
  bool bracket_too_small = false;
};

/// Bisection on w with level μw²/λ around the origin; runs exactly
/// ⌈log₂(w_hi/tol)⌉ iterations. Sets cert.w_max and cert.roa_level.
/// Throws NoSafeRoa when even the centre is not safe.
WmaxResult find_wmax(clf::ClfCertificate& cert, const hj::ValueGrid& brs, const hj::TargetSet& target,
                     const WmaxOptions& opts = {});

}  // namespace robustroa::roa
