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

#include "robustroa/error.hpp"

namespace robustroa {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::CflViolation: return "CflViolation";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::TargetOutsideGrid: return "TargetOutsideGrid";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::OutOfGrid: return "OutOfGrid";
    case ErrorCode::NoSafeRoa: return "NoSafeRoa";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ContactViolation: return "ContactViolation";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SingularHessian: return "SingularHessian";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace robustroa
