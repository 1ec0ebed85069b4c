#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace prisample {

enum class ErrorCode {
  MissingFeature,
  ZeroDenominator,
  InvalidFeature,
  DuplicateId,
  UnknownId,
  EmptyMaster,
  MasterMismatch,
  AlreadyExhausted,
  EmptySample,
  NotPositiveSemidefinite,
  InsufficientNodes,
  MalformedCurve,
  MalformedMaster,
  ChecksumMismatch,
  Parse,
  Io,
  InvalidArgument,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// All library failures surface as this exception; the code is stable and
// the CLI prints it verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace prisample
