#pragma once

#include <stdexcept>
#include <string>

namespace kgof {

enum class ErrorCode {
  GridTooFine,
  InvalidFamily,
  OutOfSupport,
  NonOrthonormalScores,
  DegenerateReflection,
  ScoreUnavailable,
  SingularInformation,
  SpaceMismatch,
  MleNotFound,
  TailExhausted,
  SingularCovariance,
  AsymmetricGrids,
  TableUnreliable,
  ConfigError,
  IoError,
};

const char* error_code_name(ErrorCode code);

/// Library-wide exception; carries a machine-readable code alongside the message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace kgof
