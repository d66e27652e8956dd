#pragma once

#include <stdexcept>
#include <string>

namespace gft {

// Every recoverable engine failure is an EngineError with a stable kind tag.
// The script runner maps these to per-statement diagnostics; nothing in the
// engine calls abort() or leaves a value half-normalized.
enum class ErrorKind {
  OddBase,
  ChartMix,
  ParityMismatch,
  NonNilpotent,
  HigherOrder,
  DivergentLimit,
  IndeterminateLeadingTerm,
  NegativeBase,
  UnassignedAtom,
  ZeroDivision,
  UnknownIdentifier,
  Syntax,
  Internal,
};

inline const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::OddBase: return "OddBaseError";
    case ErrorKind::ChartMix: return "ChartMixError";
    case ErrorKind::ParityMismatch: return "ParityMismatchError";
    case ErrorKind::NonNilpotent: return "NonNilpotentError";
    case ErrorKind::HigherOrder: return "HigherOrderError";
    case ErrorKind::DivergentLimit: return "DivergentLimitError";
    case ErrorKind::IndeterminateLeadingTerm: return "IndeterminateLeadingTermError";
    case ErrorKind::NegativeBase: return "NegativeBaseError";
    case ErrorKind::UnassignedAtom: return "UnassignedAtomError";
    case ErrorKind::ZeroDivision: return "ZeroDivisionError";
    case ErrorKind::UnknownIdentifier: return "UnknownIdentifierError";
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::Internal: return "InternalError";
  }
  return "EngineError";
}

class EngineError : public std::runtime_error {
 public:
  EngineError(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw EngineError(kind, message);
}

}  // namespace gft
