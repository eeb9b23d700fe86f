#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sclab {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  AsymmetricJoint,
  NotNormalized,
  ZeroMassVertex,
  DuplicateVertex,
  KernelNotNormalized,
  EmptySupport,
  EmptySubset,
  ZeroConditionalMass,
  GraphMismatch,
  EigSolverFailure,
  DegenerateCovariance,
  ZeroFunction,
  SizeGuardExceeded,
  IncompleteLabelMap,
  GeometryViolation,
  SpecMismatch,
  ConstructionVerificationFailed,
  TooManyOutputs,
  EmptySample,
  Divergence,
  NonFiniteGradient,
  SingularCovariance,
  NotOrthonormal,
  BetaZero,
  AlphaExceedsPmin,
  AllGridPointsFailed,
  IncompatibleConfig,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (and the CLI exit-code mapping) can dispatch without parsing text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& detail);

inline void require(bool condition, ErrorCode code, const std::string& detail) {
  if (!condition) fail(code, detail);
}

}  // namespace sclab
