#pragma once

#include <stdexcept>
#include <string>

namespace newcomb {

enum class ErrorCode {
  // network validation
  DuplicateId,
  UnknownParent,
  CptShapeMismatch,
  RowNotNormalized,
  CycleDetected,
  // lookups and queries
  UnknownNode,
  UnknownState,
  IncompleteAssignment,
  ImpossibleEvidence,
  // decision evaluation
  ImpossibleAction,
  MissingAnnotations,
  // logical-node transforms
  DuplicateLogicalId,
  UnknownRewireTarget,
  MissingSelfAnnotation,
  MultipleSelfAnnotations,
  StateMismatch,
  // scenario construction and parsing
  OrderingViolated,
  InvalidProbability,
  SyntaxError,
  SchemaError,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownParent: return "UnknownParent";
    case ErrorCode::CptShapeMismatch: return "CptShapeMismatch";
    case ErrorCode::RowNotNormalized: return "RowNotNormalized";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::IncompleteAssignment: return "IncompleteAssignment";
    case ErrorCode::ImpossibleEvidence: return "ImpossibleEvidence";
    case ErrorCode::ImpossibleAction: return "ImpossibleAction";
    case ErrorCode::MissingAnnotations: return "MissingAnnotations";
    case ErrorCode::DuplicateLogicalId: return "DuplicateLogicalId";
    case ErrorCode::UnknownRewireTarget: return "UnknownRewireTarget";
    case ErrorCode::MissingSelfAnnotation: return "MissingSelfAnnotation";
    case ErrorCode::MultipleSelfAnnotations: return "MultipleSelfAnnotations";
    case ErrorCode::StateMismatch: return "StateMismatch";
    case ErrorCode::OrderingViolated: return "OrderingViolated";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::SchemaError: return "SchemaError";
  }
  return "UnknownError";
}

// Single exception type for every structured failure in the library. The
// code tells machine callers (and the CLI's exit-code mapping) what went
// wrong; the message carries the offending ids/values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

}  // namespace newcomb
