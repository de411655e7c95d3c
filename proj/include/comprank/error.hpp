#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace comprank {

/// Failure category, used by callers that need to branch on the cause.
enum class ErrorKind {
  Io,                    // file cannot be opened / written
  Parse,                 // malformed record (message names the line)
  Validation,            // duplicate id, unknown id, self pair, empty input, missing gold score
  Range,                 // numeric field outside its legal interval
  Capacity,              // requested more pairs than N(N-1) allows
  DegenerateScale,       // zero score spread, sigma_s undefined
  DegenerateFit,         // constant predictor, least squares undefined
  UndefinedCorrelation,  // constant input to a correlation coefficient
  MethodMismatch,        // method preconditions violated (e.g. soft input to hard BT)
  Config,                // invalid configuration value
  Input,                 // non-finite or otherwise unusable numeric input
  MissingLabel,          // neither label token present in returned logprobs
  Transport,             // HTTP failure after retries
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Range: return "range";
    case ErrorKind::Capacity: return "capacity";
    case ErrorKind::DegenerateScale: return "degenerate-scale";
    case ErrorKind::DegenerateFit: return "degenerate-fit";
    case ErrorKind::UndefinedCorrelation: return "undefined-correlation";
    case ErrorKind::MethodMismatch: return "method-mismatch";
    case ErrorKind::Config: return "config";
    case ErrorKind::Input: return "input";
    case ErrorKind::MissingLabel: return "missing-label";
    case ErrorKind::Transport: return "transport";
  }
  return "unknown";
}

}  // namespace comprank
