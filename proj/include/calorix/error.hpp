#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace calorix {

enum class ErrorCode {
  NotSymmetric,
  NotPositiveDefinite,
  DimensionTooSmall,
  DimensionMismatch,
  InvalidResolution,
  InvalidArgument,
  NonRationalCoefficients,
  NotCaloric,
  OffsetTooLarge,
  TargetOnBoundary,
  CornerTooClose,
  RegionMismatch,
  DegenerateData,
  ConfigInvalid,
  TaskFailed,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-status mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace calorix
