#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oscq {

enum class ErrorCode {
  NonSymmetric,
  NegativeEntry,
  InvalidSystem,
  ZeroFrequency,
  StepLimitExceeded,
  Blowup,
  BoundViolated,
  SingularStiffness,
  ZeroEnergy,
  NotHermitian,
  DimensionMismatch,
  ZeroWallSpring,
  EmptySubset,
  DimensionBudget,
  RegimeViolated,
  NotHermitianObservable,
  SingularK1,
  OutOfRange,
  SubnormalizationViolated,
  ConfigInvalid,
};

std::string_view error_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// CLI can map it to an exit status and print the module-level name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& detail);

}  // namespace oscq
