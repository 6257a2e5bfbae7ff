#include "dpq2p1/error.hpp"

namespace dpq2p1 {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveRadius: return "non_positive_radius";
    case ErrorCode::LayerSumMismatch: return "layer_sum_mismatch";
    case ErrorCode::DegenerateSector: return "degenerate_sector";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::SingularGeometryJacobian: return "singular_geometry_jacobian";
    case ErrorCode::UnsupportedOrder: return "unsupported_order";
    case ErrorCode::NonPositiveJacobian: return "non_positive_jacobian";
    case ErrorCode::SingularMatrix: return "singular_matrix";
    case ErrorCode::LinearSolveFailed: return "linear_solve_failed";
    case ErrorCode::DampingFloorReached: return "damping_floor_reached";
    case ErrorCode::MaxIterationsExceeded: return "max_iterations_exceeded";
    case ErrorCode::InsideDefect: return "inside_defect";
    case ErrorCode::OutOfRange: return "out_of_range";
    case ErrorCode::EigenSolveFailed: return "eigen_solve_failed";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace dpq2p1
