#include "artic/error.hpp"

namespace artic {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AngleNearPi: return "AngleNearPi";
    case ErrorKind::DegenerateTwist: return "DegenerateTwist";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::DegenerateForce: return "DegenerateForce";
    case ErrorKind::EmptyCloud: return "EmptyCloud";
    case ErrorKind::DuplicateAffordance: return "DuplicateAffordance";
    case ErrorKind::BelowThreshold: return "BelowThreshold";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InconsistentColumns: return "InconsistentColumns";
    case ErrorKind::NotAttached: return "NotAttached";
    case ErrorKind::GraspOnHinge: return "GraspOnHinge";
    case ErrorKind::InconsistentBounds: return "InconsistentBounds";
    case ErrorKind::InfeasibleQp: return "InfeasibleQp";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace artic
