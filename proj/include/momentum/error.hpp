#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace momentum {

enum class ErrorCode {
  // ingest
  MissingColumn,
  BadToken,
  EmptyInput,
  MissingRequired,
  UnknownColumn,
  // streaks
  EmptyStreaks,
  DegenerateMargins,
  // ewm
  AllColumnsUninformative,
  ColumnMismatch,
  // changepoint / shift
  EmptySeries,
  NoConvergence,
  TimeOutOfRange,
  // stats / model
  NonConvergence,
  DegenerateDesign,
  SingleClass,
  DimMismatch,
  NonFiniteLoss,
  // explain
  TooManyFeatures,
  EmptyBackground,
  // generic argument validation
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::BadToken: return "BadToken";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::MissingRequired: return "MissingRequired";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::EmptyStreaks: return "EmptyStreaks";
    case ErrorCode::DegenerateMargins: return "DegenerateMargins";
    case ErrorCode::AllColumnsUninformative: return "AllColumnsUninformative";
    case ErrorCode::ColumnMismatch: return "ColumnMismatch";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::TimeOutOfRange: return "TimeOutOfRange";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::TooManyFeatures: return "TooManyFeatures";
    case ErrorCode::EmptyBackground: return "EmptyBackground";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Domain error raised by every module. what() reads "<Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace momentum
