#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hatewatch {

// Machine-readable failure classes. The CLI maps these to exit codes and the
// HTTP service maps them to status codes, so keep the set small and stable.
enum class ErrorCode {
  kIo,
  kFormat,
  kInvalidArgument,
  kUndefinedInput,
  kInvariantViolation,
  kConsistency,
  kTraining,
  kOutOfVocabulary,
  kEmptySeed,
  kOovSeed,
  kState,
  kNotInQueue,
  kDuplicateDecision,
  kStaleSession,
  kNotFound,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hatewatch
