#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fdedtm {

enum class ErrorKind {
  CenterMismatch,
  OrderUnderflow,
  InvalidArgument,
  Syntax,
  NonAffineArgument,
  NegativeDelay,
  NonConstantDenominator,
  NotExplicit,
  OrderViolation,
  NotKnownFunction,
  MissingHistory,
  CoefficientNotReady,
  HistoryUnderflow,
  LatticeExplosion,
  InconsistentConditions,
  NaiveModeUnsupported,
  ProblemFormat,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::CenterMismatch: return "CenterMismatch";
    case ErrorKind::OrderUnderflow: return "OrderUnderflow";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Syntax: return "Syntax";
    case ErrorKind::NonAffineArgument: return "NonAffineArgument";
    case ErrorKind::NegativeDelay: return "NegativeDelay";
    case ErrorKind::NonConstantDenominator: return "NonConstantDenominator";
    case ErrorKind::NotExplicit: return "NotExplicit";
    case ErrorKind::OrderViolation: return "OrderViolation";
    case ErrorKind::NotKnownFunction: return "NotKnownFunction";
    case ErrorKind::MissingHistory: return "MissingHistory";
    case ErrorKind::CoefficientNotReady: return "CoefficientNotReady";
    case ErrorKind::HistoryUnderflow: return "HistoryUnderflow";
    case ErrorKind::LatticeExplosion: return "LatticeExplosion";
    case ErrorKind::InconsistentConditions: return "InconsistentConditions";
    case ErrorKind::NaiveModeUnsupported: return "NaiveModeUnsupported";
    case ErrorKind::ProblemFormat: return "ProblemFormat";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failures additionally report the byte offset into the source text.
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, const std::string& what)
      : Error(ErrorKind::Syntax, what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace fdedtm
