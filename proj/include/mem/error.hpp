#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mem {

enum class ErrorCode {
  MagicMismatch,
  Truncated,
  SampleTooLarge,
  DimensionMismatch,
  NonFiniteInput,
  OverflowRisk,
  DimensionTooLarge,
  InvalidRank,
  NoConvergence,
  NegativeInput,
  EmptySupport,
  InvalidGamma,
  InvalidProbability,
  ZeroReference,
  RankDeficient,
  BoundViolated,
  InvalidArgument,
  Io,
  Parse,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MagicMismatch: return "MagicMismatch";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::SampleTooLarge: return "SampleTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::OverflowRisk: return "OverflowRisk";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::InvalidRank: return "InvalidRank";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NegativeInput: return "NegativeInput";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::InvalidGamma: return "InvalidGamma";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::BoundViolated: return "BoundViolated";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

namespace detail {
[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }
}  // namespace detail

}  // namespace mem
