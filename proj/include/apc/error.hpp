#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace apc {

enum class ErrorCode {
  // usage
  Usage,
  // data
  DimensionMismatch,
  NotSymmetric,
  UnsupportedFormat,
  MalformedEntry,
  IndexOutOfBounds,
  InvalidDimensions,
  IndivisibleRows,
  RankDeficientBlock,
  InconsistentSystem,
  TooLarge,
  Io,
  // numerical
  NotPositiveDefinite,
  DegenerateSpectrum,
  TuningFailed,
  OutOfDomain,
  Diverged,
  VerificationFailed,
  InsufficientData,
};

std::string_view to_string(ErrorCode code);

// Process exit code for an error: 1 usage, 2 data, 3 numerical.
int exit_code(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace apc
