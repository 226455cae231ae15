#include "common/error.hpp"

namespace vulnprio {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Validation: return "Validation";
    case ErrorCode::UnknownCve: return "UnknownCve";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::MissingScore: return "MissingScore";
    case ErrorCode::MissingScoreFor: return "MissingScoreFor";
    case ErrorCode::RootNode: return "RootNode";
    case ErrorCode::IncompleteAssignment: return "IncompleteAssignment";
    case ErrorCode::GraphTooLarge: return "GraphTooLarge";
    case ErrorCode::ZeroProbabilityEvidence: return "ZeroProbabilityEvidence";
    case ErrorCode::Transport: return "TransportError";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::NotFound: return "NotFound";
  }
  return "Unknown";
}

}  // namespace vulnprio
