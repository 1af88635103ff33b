#pragma once

#include <stdexcept>
#include <string>

namespace stopgame {

enum class ErrorCode {
  kRejected,            // model violates a standing assumption
  kDegenerateWeight,    // weighted norm with a zero weight entry
  kMaxIterExceeded,     // iteration budget exhausted before convergence
  kMonotonicityViolation,  // monotone iteration decreased; implementation bug
  kLpInfeasible,        // impossible for finite matrices; internal bug
  kSingularSystem,      // impossible for alpha > 0; internal bug
  kParseError,          // malformed model/solution document
  kInvalidArgument,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const { return code_; }
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace stopgame
