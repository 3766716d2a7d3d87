#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pbgeo {

enum class ErrorCode {
  InvalidArgument,
  MismatchedBase,
  AntipodalPoints,
  ZeroDirection,
  PoleExcluded,
  KappaTooLarge,
  SingularJacobian,
  MaxItersExceeded,
  ModelNotEuclidean,
  EmptyData,
  RankDeficient,
  SingularNormalEquations,
  DependentInput,
  EmptyNeighborhood,
  DisconnectedGraph,
  FixedPointDivergence,
  DegenerateCurve,
  Format,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MismatchedBase: return "MismatchedBase";
    case ErrorCode::AntipodalPoints: return "AntipodalPoints";
    case ErrorCode::ZeroDirection: return "ZeroDirection";
    case ErrorCode::PoleExcluded: return "PoleExcluded";
    case ErrorCode::KappaTooLarge: return "KappaTooLarge";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::MaxItersExceeded: return "MaxItersExceeded";
    case ErrorCode::ModelNotEuclidean: return "ModelNotEuclidean";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::DependentInput: return "DependentInput";
    case ErrorCode::EmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::FixedPointDivergence: return "FixedPointDivergence";
    case ErrorCode::DegenerateCurve: return "DegenerateCurve";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

/// Exception carrying a machine-readable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pbgeo
