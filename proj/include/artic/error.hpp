#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace artic {

enum class ErrorKind {
  AngleNearPi,
  DegenerateTwist,
  ZeroVector,
  DegenerateForce,
  EmptyCloud,
  DuplicateAffordance,
  BelowThreshold,
  PreconditionViolated,
  ParseError,
  InconsistentColumns,
  NotAttached,
  GraspOnHinge,
  InconsistentBounds,
  InfeasibleQp,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every recoverable failure in the library is reported through this type;
/// callers branch on kind() rather than on the message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace artic
