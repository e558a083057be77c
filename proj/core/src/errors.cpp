#include "oscq/errors.hpp"

namespace oscq {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonSymmetric: return "NonSymmetric";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::InvalidSystem: return "InvalidSystem";
    case ErrorCode::ZeroFrequency: return "ZeroFrequency";
    case ErrorCode::StepLimitExceeded: return "StepLimitExceeded";
    case ErrorCode::Blowup: return "Blowup";
    case ErrorCode::BoundViolated: return "BoundViolated";
    case ErrorCode::SingularStiffness: return "SingularStiffness";
    case ErrorCode::ZeroEnergy: return "ZeroEnergy";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroWallSpring: return "ZeroWallSpring";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::DimensionBudget: return "DimensionBudget";
    case ErrorCode::RegimeViolated: return "RegimeViolated";
    case ErrorCode::NotHermitianObservable: return "NotHermitianObservable";
    case ErrorCode::SingularK1: return "SingularK1";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SubnormalizationViolated: return "SubnormalizationViolated";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_name(code)) + ": " + detail), code_(code) {}

void raise(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace oscq
