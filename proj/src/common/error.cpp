#include "common/error.hpp"

namespace contoursel {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::invalid_problem: return "invalid_problem";
    case ErrorCode::contract: return "contract";
    case ErrorCode::data: return "data";
    case ErrorCode::io: return "io";
    case ErrorCode::parse: return "parse";
    case ErrorCode::training: return "training";
    case ErrorCode::selection: return "selection";
    case ErrorCode::protocol: return "protocol";
    case ErrorCode::config: return "config";
    case ErrorCode::internal: return "internal";
    case ErrorCode::check_failed: return "check_failed";
  }
  return "unknown";
}

}  // namespace contoursel
