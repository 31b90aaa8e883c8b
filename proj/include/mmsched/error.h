#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmsched {

enum class ErrorCode {
  kInvalidNetwork,
  kInvalidPath,
  kPrecondition,
  kBudgetExceeded,
  kDistanceUnavailable,
  kParse,
  kConfig,
  kMalformedAction,
  kOrdering,
  kInternal,
};

std::string_view error_code_name(ErrorCode code);

// All library failures are reported through this type. The code is stable and
// machine readable; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mmsched
