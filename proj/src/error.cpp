#include "apc/error.hpp"

namespace apc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage: return "Usage";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::MalformedEntry: return "MalformedEntry";
    case ErrorCode::IndexOutOfBounds: return "IndexOutOfBounds";
    case ErrorCode::InvalidDimensions: return "InvalidDimensions";
    case ErrorCode::IndivisibleRows: return "IndivisibleRows";
    case ErrorCode::RankDeficientBlock: return "RankDeficientBlock";
    case ErrorCode::InconsistentSystem: return "InconsistentSystem";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Io: return "Io";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::TuningFailed: return "TuningFailed";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::InsufficientData: return "InsufficientData";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Usage:
      return 1;
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NotSymmetric:
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::MalformedEntry:
    case ErrorCode::IndexOutOfBounds:
    case ErrorCode::InvalidDimensions:
    case ErrorCode::IndivisibleRows:
    case ErrorCode::RankDeficientBlock:
    case ErrorCode::InconsistentSystem:
    case ErrorCode::TooLarge:
    case ErrorCode::Io:
      return 2;
    default:
      return 3;
  }
}

}  // namespace apc
