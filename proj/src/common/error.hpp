#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vulnprio {

enum class ErrorCode {
  InvalidArgument,
  Parse,
  Io,
  Config,
  Validation,
  UnknownCve,
  UnknownNode,
  MissingScore,
  MissingScoreFor,
  RootNode,
  IncompleteAssignment,
  GraphTooLarge,
  ZeroProbabilityEvidence,
  Transport,
  MalformedResponse,
  NotFound,
};

std::string_view to_string(ErrorCode code) noexcept;

// Single exception type for the core; the C layer maps `code()` onto status
// values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vulnprio
