#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fracspace {

enum class ErrorCode {
  NonPositiveEigenvalue,
  NotOrthonormal,
  DimensionMismatch,
  InvalidExponentOrder,
  NonPositiveT,
  SingularSystem,
  NotInSubspace,
  ConvergenceFailure,
  ThetaOutOfRange,
  QuadratureNotConverged,
  InvalidGrid,
  EigensolveFailure,
  EmptyNullspace,
  FactorizationFailure,
  SolverFailure,
  SingularConstrainedOperator,
  RetractionIdentityViolated,
  AmbiguousClassification,
  UnknownExperiment,
  InvalidConfig,
  IoError,
};

constexpr std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveEigenvalue: return "NonPositiveEigenvalue";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidExponentOrder: return "InvalidExponentOrder";
    case ErrorCode::NonPositiveT: return "NonPositiveT";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NotInSubspace: return "NotInSubspace";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::ThetaOutOfRange: return "ThetaOutOfRange";
    case ErrorCode::QuadratureNotConverged: return "QuadratureNotConverged";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::EigensolveFailure: return "EigensolveFailure";
    case ErrorCode::EmptyNullspace: return "EmptyNullspace";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::SingularConstrainedOperator: return "SingularConstrainedOperator";
    case ErrorCode::RetractionIdentityViolated: return "RetractionIdentityViolated";
    case ErrorCode::AmbiguousClassification: return "AmbiguousClassification";
    case ErrorCode::UnknownExperiment: return "UnknownExperiment";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the library; `code()` identifies the failure
/// class and is what the CLI reports in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fracspace
