#pragma once

#include <stdexcept>
#include <string>

namespace nalloc {

enum class ErrorCode {
  FileNotFound,
  MalformedRow,
  NonPositivePrice,
  DuplicateDate,
  TooShort,
  EmptySplit,
  InvalidSpec,
  DimensionMismatch,
  LengthMismatch,
  EmptyDataset,
  DivergedLoss,
  AlignmentError,
  IndexOutOfRange,
  InsufficientHistory,
  NegativeDiagonal,
  SingularRisk,
  ZeroAssets,
  InsufficientWarmup,
  IoError,
};

const char* error_code_name(ErrorCode code);

/// Exception carrying a machine-checkable error code plus a human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nalloc
