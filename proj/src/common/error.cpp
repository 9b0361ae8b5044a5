#include "common/error.hpp"

namespace edgeboost {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::invalid_config: return "invalid-config";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::validation_error: return "validation-error";
    case ErrorCode::io_error: return "io-error";
    case ErrorCode::load_error: return "load-error";
    case ErrorCode::budget_infeasible: return "budget-infeasible";
    case ErrorCode::training_diverged: return "training-diverged";
    case ErrorCode::masked_action: return "masked-action";
    case ErrorCode::internal: return "internal";
  }
  return "unknown";
}

}  // namespace edgeboost
