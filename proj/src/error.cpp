#include "mvtri/error.hpp"

namespace mvtri {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegeneratePoint: return "DegeneratePoint";
    case ErrorCode::InvalidRotation: return "InvalidRotation";
    case ErrorCode::InvalidIntrinsics: return "InvalidIntrinsics";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::CoincidentCenters: return "CoincidentCenters";
    case ErrorCode::DegenerateAllZero: return "DegenerateAllZero";
    case ErrorCode::NonFiniteResidual: return "NonFiniteResidual";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::InsufficientObservations: return "InsufficientObservations";
    case ErrorCode::InvalidTrack: return "InvalidTrack";
    case ErrorCode::RankDeficientF: return "RankDeficientF";
    case ErrorCode::EpipoleAtPoint: return "EpipoleAtPoint";
    case ErrorCode::InitializationFailed: return "InitializationFailed";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec:
    case ErrorCode::ConfigError:
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
      return ErrorCategory::Config;
    case ErrorCode::IoError:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Numerical;
  }
}

}  // namespace mvtri
