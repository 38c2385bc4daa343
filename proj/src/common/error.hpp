#pragma once

#include <stdexcept>
#include <string>

namespace contoursel {

// Error categories. Values are stable: they double as C API status codes
// and CLI exit codes.
enum class ErrorCode : int {
  invalid_argument = 1,
  invalid_problem = 2,
  contract = 3,
  data = 4,
  io = 5,
  parse = 6,
  training = 7,
  selection = 8,
  protocol = 9,
  config = 10,
  internal = 11,
  check_failed = 12,  // a verification command ran but its check did not pass
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace contoursel
