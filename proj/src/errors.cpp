#include "kgof/errors.hpp"

namespace kgof {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::GridTooFine: return "GridTooFine";
    case ErrorCode::InvalidFamily: return "InvalidFamily";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::NonOrthonormalScores: return "NonOrthonormalScores";
    case ErrorCode::DegenerateReflection: return "DegenerateReflection";
    case ErrorCode::ScoreUnavailable: return "ScoreUnavailable";
    case ErrorCode::SingularInformation: return "SingularInformation";
    case ErrorCode::SpaceMismatch: return "SpaceMismatch";
    case ErrorCode::MleNotFound: return "MleNotFound";
    case ErrorCode::TailExhausted: return "TailExhausted";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::AsymmetricGrids: return "AsymmetricGrids";
    case ErrorCode::TableUnreliable: return "TableUnreliable";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace kgof
