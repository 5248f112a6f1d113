#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace csts {

enum class ErrorCode {
  UnknownEntity,
  SignatureViolation,
  TemporalMisalignment,
  InvalidEntity,
  OutOfOrderDelta,
  IllegalTransition,
  StaleTimestamp,
  TypeMismatch,
  UnresolvableObservation,
  IoFailure,
  UnknownFormat,
  InvalidSpec,
  IncompatibleSchema,
  InfeasibleInjection,
  MissingColumn,
  UnfittedHistory,
  SplitMismatch,
  ViabilityGateFailure,
  DegenerateClass,
  UnknownFocal,
  EmptySupport,
  InadmissibleView,
  InsufficientObjects,
  ParseError,
  MissingArtifact,
};

std::string_view to_string(ErrorCode code);

// Single exception type carrying a machine-checkable category.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace csts
