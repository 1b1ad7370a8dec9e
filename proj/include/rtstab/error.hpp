#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rtstab {

enum class ErrorCode {
  InvalidInput,
  PreconditionViolation,
  DomainError,
  InverseFailure,
  NonPositiveDensity,
  DegeneratePressure,
  SolverDivergence,
  NoSignChange,
  NotUnstableOrientation,
  DegenerateMode,
  NotARotation,
  SingularStep,
  ZeroSignal,
  IllConditioned,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InverseFailure: return "InverseFailure";
    case ErrorCode::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorCode::DegeneratePressure: return "DegeneratePressure";
    case ErrorCode::SolverDivergence: return "SolverDivergence";
    case ErrorCode::NoSignChange: return "NoSignChange";
    case ErrorCode::NotUnstableOrientation: return "NotUnstableOrientation";
    case ErrorCode::DegenerateMode: return "DegenerateMode";
    case ErrorCode::NotARotation: return "NotARotation";
    case ErrorCode::SingularStep: return "SingularStep";
    case ErrorCode::ZeroSignal: return "ZeroSignal";
    case ErrorCode::IllConditioned: return "IllConditioned";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the analyzer; the code identifies the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  /// Validation-type failures (bad input) as opposed to numerical failures.
  [[nodiscard]] bool is_validation() const noexcept {
    return code_ == ErrorCode::InvalidInput || code_ == ErrorCode::PreconditionViolation ||
           code_ == ErrorCode::DomainError || code_ == ErrorCode::NotUnstableOrientation ||
           code_ == ErrorCode::NotARotation;
  }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace rtstab
