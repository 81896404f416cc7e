#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shadowgame {

enum class ErrorCode {
  InvalidInput,
  SingularBasis,
  TooLarge,
  RetryExhausted,
  InvalidTable,
  IterationLimit,
  InfeasibleAtVertex,
  OptimumCutOff,
  NoSolution,
  IoError,
  ParseError,
  TooManyPaths,
  NoNewPaths,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::SingularBasis: return "SingularBasis";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::RetryExhausted: return "RetryExhausted";
    case ErrorCode::InvalidTable: return "InvalidTable";
    case ErrorCode::IterationLimit: return "IterationLimit";
    case ErrorCode::InfeasibleAtVertex: return "InfeasibleAtVertex";
    case ErrorCode::OptimumCutOff: return "OptimumCutOff";
    case ErrorCode::NoSolution: return "NoSolution";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TooManyPaths: return "TooManyPaths";
    case ErrorCode::NoNewPaths: return "NoNewPaths";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Input-document errors, tagged with the 1-based line that caused them
/// (0 when the problem is not tied to a single line).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace shadowgame
