#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dpq2p1 {

enum class ErrorCode {
  NonPositiveRadius,
  LayerSumMismatch,
  DegenerateSector,
  InvalidArgument,
  SingularGeometryJacobian,
  UnsupportedOrder,
  NonPositiveJacobian,
  SingularMatrix,
  LinearSolveFailed,
  DampingFloorReached,
  MaxIterationsExceeded,
  InsideDefect,
  OutOfRange,
  EigenSolveFailed,
  Config,
  Io,
};

/// Stable lower_snake_case name, used in `ERROR <code> <detail>` lines.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dpq2p1
