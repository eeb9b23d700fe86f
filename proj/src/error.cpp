#include "sclab/error.hpp"

namespace sclab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::AsymmetricJoint: return "AsymmetricJoint";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::ZeroMassVertex: return "ZeroMassVertex";
    case ErrorCode::DuplicateVertex: return "DuplicateVertex";
    case ErrorCode::KernelNotNormalized: return "KernelNotNormalized";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::ZeroConditionalMass: return "ZeroConditionalMass";
    case ErrorCode::GraphMismatch: return "GraphMismatch";
    case ErrorCode::EigSolverFailure: return "EigSolverFailure";
    case ErrorCode::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorCode::ZeroFunction: return "ZeroFunction";
    case ErrorCode::SizeGuardExceeded: return "SizeGuardExceeded";
    case ErrorCode::IncompleteLabelMap: return "IncompleteLabelMap";
    case ErrorCode::GeometryViolation: return "GeometryViolation";
    case ErrorCode::SpecMismatch: return "SpecMismatch";
    case ErrorCode::ConstructionVerificationFailed: return "ConstructionVerificationFailed";
    case ErrorCode::TooManyOutputs: return "TooManyOutputs";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::Divergence: return "Divergence";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::BetaZero: return "BetaZero";
    case ErrorCode::AlphaExceedsPmin: return "AlphaExceedsPmin";
    case ErrorCode::AllGridPointsFailed: return "AllGridPointsFailed";
    case ErrorCode::IncompatibleConfig: return "IncompatibleConfig";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail),
      code_(code),
      detail_(detail) {}

void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

}  // namespace sclab
