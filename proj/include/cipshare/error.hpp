#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cipshare {

enum class ErrorCode {
  kIndexOutOfRange,
  kInvalidInstance,
  kInfeasibleInstance,
  kInfeasibleUser,
  kInfeasibleDual,
  kZeroCostSolution,
  kZeroCostOverload,
  kUnboundedOrInfeasibleLP,
  kScaleOverflow,
  kIterationLimit,
  kSizeCapExceeded,
  kNonpositiveDistance,
  kRateAtOne,
  kInfeasibleConfig,
  kParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kInvalidInstance: return "InvalidInstance";
    case ErrorCode::kInfeasibleInstance: return "InfeasibleInstance";
    case ErrorCode::kInfeasibleUser: return "InfeasibleUser";
    case ErrorCode::kInfeasibleDual: return "InfeasibleDual";
    case ErrorCode::kZeroCostSolution: return "ZeroCostSolution";
    case ErrorCode::kZeroCostOverload: return "ZeroCostOverload";
    case ErrorCode::kUnboundedOrInfeasibleLP: return "UnboundedOrInfeasibleLP";
    case ErrorCode::kScaleOverflow: return "ScaleOverflow";
    case ErrorCode::kIterationLimit: return "IterationLimit";
    case ErrorCode::kSizeCapExceeded: return "SizeCapExceeded";
    case ErrorCode::kNonpositiveDistance: return "NonpositiveDistance";
    case ErrorCode::kRateAtOne: return "RateAtOne";
    case ErrorCode::kInfeasibleConfig: return "InfeasibleConfig";
    case ErrorCode::kParseError: return "ParseError";
  }
  return "Unknown";
}

// All library failures are reported through this type; `code()` lets callers
// branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cipshare
