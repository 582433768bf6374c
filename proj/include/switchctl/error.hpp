#pragma once

#include <stdexcept>
#include <string>

namespace switchctl {

enum class ErrorCode {
  kEmptyPool,
  kRestartBudgetExhausted,
  kInfeasible,
  kConditionViolated,
  kInvalidArgument,
  kConfig,
};

const char* to_string(ErrorCode code);

// Single exception type for every failure the library reports. The code lets
// callers branch on the condition without parsing the message.
class SwitchError : public std::runtime_error {
 public:
  SwitchError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace switchctl
