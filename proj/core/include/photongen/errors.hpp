#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace photongen {

enum class ErrorCode {
  invalid_argument,
  degenerate_flux,
  step_size,
  schedule,
  convergence,
  out_of_range,
  infeasible_target,
  validation,
  io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base error for every failure the library reports. The code is stable and
/// ends up in the CLI's machine-readable error record.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace photongen
