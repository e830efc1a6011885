#include "vlio/error.hpp"

namespace vlio {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case ErrorCode::kWindowTooShort: return "WindowTooShort";
    case ErrorCode::kTimestampOutOfRange: return "TimestampOutOfRange";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kZeroRangePoint: return "ZeroRangePoint";
    case ErrorCode::kEmptyMap: return "EmptyMap";
    case ErrorCode::kSingularCovariance: return "SingularCovariance";
    case ErrorCode::kDegenerateNeighbors: return "DegenerateNeighbors";
    case ErrorCode::kInvalidMatch: return "InvalidMatch";
    case ErrorCode::kNoValidMatches: return "NoValidMatches";
    case ErrorCode::kOutOfDuration: return "OutOfDuration";
    case ErrorCode::kWindowUncovered: return "WindowUncovered";
    case ErrorCode::kNoOverlap: return "NoOverlap";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kFormatError: return "FormatError";
  }
  return "Unknown";
}

}  // namespace vlio
