#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mvtri {

enum class ErrorCode {
  // geometry
  DegeneratePoint,
  InvalidRotation,
  InvalidIntrinsics,
  RankDeficient,
  CoincidentCenters,
  // numeric
  DegenerateAllZero,
  NonFiniteResidual,
  DomainError,
  // calibration
  InsufficientPoints,
  DegenerateGeometry,
  // triangulation
  InsufficientObservations,
  InvalidTrack,
  RankDeficientF,
  EpipoleAtPoint,
  InitializationFailed,
  // scene / harness
  InvalidSpec,
  EmptyInput,
  ConfigError,
  ParseError,
  ValidationError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Broad classes used to pick process exit codes in the CLI.
enum class ErrorCategory { Config, Numerical, Io };

ErrorCategory category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// Message without the error-code prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace mvtri
