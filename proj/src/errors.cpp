#include "stopgame/errors.hpp"

namespace stopgame {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRejected:
      return "REJECTED";
    case ErrorCode::kDegenerateWeight:
      return "DEGENERATE_WEIGHT";
    case ErrorCode::kMaxIterExceeded:
      return "MAX_ITER_EXCEEDED";
    case ErrorCode::kMonotonicityViolation:
      return "MONOTONICITY_VIOLATION";
    case ErrorCode::kLpInfeasible:
      return "LP_INFEASIBLE";
    case ErrorCode::kSingularSystem:
      return "SINGULAR_SYSTEM";
    case ErrorCode::kParseError:
      return "PARSE_ERROR";
    case ErrorCode::kInvalidArgument:
      return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

}  // namespace stopgame
