#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specfw {

enum class ErrorCode {
  DimensionMismatch,
  NonConvergence,
  ZeroScale,
  InfeasibleInput,
  NotInImage,
  DegenerateStep,
  StepTooLarge,
  InvalidShape,
  InvalidConfig,
  BudgetExceeded,
  MismatchedInstances,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace specfw
