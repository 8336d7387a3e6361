#include "hatewatch/error.hpp"

namespace hatewatch {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kFormat: return "format_error";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kUndefinedInput: return "undefined_input";
    case ErrorCode::kInvariantViolation: return "invariant_violation";
    case ErrorCode::kConsistency: return "consistency_error";
    case ErrorCode::kTraining: return "training_error";
    case ErrorCode::kOutOfVocabulary: return "out_of_vocabulary";
    case ErrorCode::kEmptySeed: return "empty_seed";
    case ErrorCode::kOovSeed: return "oov_seed";
    case ErrorCode::kState: return "invalid_state";
    case ErrorCode::kNotInQueue: return "not_in_queue";
    case ErrorCode::kDuplicateDecision: return "duplicate_decision";
    case ErrorCode::kStaleSession: return "stale_session";
    case ErrorCode::kNotFound: return "not_found";
  }
  return "unknown";
}

}  // namespace hatewatch
