#pragma once

#include <stdexcept>
#include <string>

namespace hdlda {

enum class ErrorCode {
  NotPositiveDefinite,
  NoConvergence,
  CorrelationOutOfRange,
  DimensionTooSmall,
  DimensionMismatch,
  EmptyClass,
  DegenerateDesign,
  LpInfeasible,
  ClassTooSmall,
  AllCombosInvalid,
  InvalidArgument,
  IoError,
  ParseError,
};

// Every failure raised by the library carries a machine-readable code so
// callers (CV, the CLI) can map it to a policy without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::CorrelationOutOfRange: return "CorrelationOutOfRange";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::LpInfeasible: return "LpInfeasible";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::AllCombosInvalid: return "AllCombosInvalid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace hdlda
