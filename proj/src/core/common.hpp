#ifndef COPER_CORE_COMMON_HPP
#define COPER_CORE_COMMON_HPP

#include <stdexcept>
#include <string>

namespace coper {

// One code per domain failure. The C API exposes the same numbering, and the
// CLI uses it as the process exit code, so values are stable.
enum class ErrorCode : int {
  Ok = 0,
  InvalidShape = 2,
  ParseError = 3,
  AlignmentError = 4,
  InvalidSpec = 5,
  InvalidLabels = 6,
  InvalidParameter = 7,
  SingularCovariance = 8,
  NotSymmetric = 9,
  EigenFailure = 10,
  NotPsd = 11,
  SingularScatter = 12,
  InvalidPlan = 13,
  InvalidState = 14,
  ConfigError = 15,
  TrainingDiverged = 16,
  IoError = 17,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace coper

#endif
