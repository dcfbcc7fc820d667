#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stfem {

enum class ErrorCode {
  InvalidArgument,
  InvalidDims,
  OmegaNotAligned,
  NonManifold,
  NonConforming,
  OutOfDomain,
  UnsupportedDegree,
  MeshMismatch,
  VariantConstraint,
  BoundaryFacet,
  DegreeOrder,
  UnstableParameters,
  Singular,
  NonPositive,
  OutsideObservationDomain,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception type thrown by every stfem routine. The code identifies the
/// failure class so callers (the study driver, tests) can branch on it.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidDims: return "InvalidDims";
    case ErrorCode::OmegaNotAligned: return "OmegaNotAligned";
    case ErrorCode::NonManifold: return "NonManifold";
    case ErrorCode::NonConforming: return "NonConforming";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::UnsupportedDegree: return "UnsupportedDegree";
    case ErrorCode::MeshMismatch: return "MeshMismatch";
    case ErrorCode::VariantConstraint: return "VariantConstraint";
    case ErrorCode::BoundaryFacet: return "BoundaryFacet";
    case ErrorCode::DegreeOrder: return "DegreeOrder";
    case ErrorCode::UnstableParameters: return "UnstableParameters";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::NonPositive: return "NonPositive";
    case ErrorCode::OutsideObservationDomain: return "OutsideObservationDomain";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace stfem
