#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cyf {

enum class ErrorKind {
  InvalidSize,
  InvalidArgument,
  GridMismatch,
  NonFinite,
  SolverFailure,
  Overflow,
  ProjectionFailure,
  NonZeroMean,
  NearSingular,
  NotNegativeDegree,
  VerificationFailure,
  RequiresNegativeG,
  BadCandidate,
  InconsistentThreshold,
  TooLarge,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying one of the named failure kinds.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cyf
