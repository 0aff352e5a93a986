#include "photongen/errors.hpp"

namespace photongen {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::degenerate_flux: return "degenerate_flux";
    case ErrorCode::step_size: return "step_size";
    case ErrorCode::schedule: return "schedule";
    case ErrorCode::convergence: return "convergence";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::infeasible_target: return "infeasible_target";
    case ErrorCode::validation: return "validation";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

}  // namespace photongen
