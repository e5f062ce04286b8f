#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace moldgen {

enum class ErrorCode {
  MismatchedSpecs,
  NonFiniteValue,
  IoFailure,
  BadMagic,
  UnsupportedVersion,
  TruncatedPayload,
  InvariantViolation,
  ParseError,
  EmptyMesh,
  OpenMesh,
  OutOfSlab,
  OneSidedMiss,
  NoSolidPixels,
  InvertedColumn,
  BadThresholds,
  BadRange,
  StepOutOfRange,
  ShapeMismatch,
  EmptyDataset,
  NonFiniteLoss,
  AllEmpty,
  DegenerateHole,
  EmptyOutput,
  Unsupported,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MismatchedSpecs: return "MismatchedSpecs";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyMesh: return "EmptyMesh";
    case ErrorCode::OpenMesh: return "OpenMesh";
    case ErrorCode::OutOfSlab: return "OutOfSlab";
    case ErrorCode::OneSidedMiss: return "OneSidedMiss";
    case ErrorCode::NoSolidPixels: return "NoSolidPixels";
    case ErrorCode::InvertedColumn: return "InvertedColumn";
    case ErrorCode::BadThresholds: return "BadThresholds";
    case ErrorCode::BadRange: return "BadRange";
    case ErrorCode::StepOutOfRange: return "StepOutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::AllEmpty: return "AllEmpty";
    case ErrorCode::DegenerateHole: return "DegenerateHole";
    case ErrorCode::EmptyOutput: return "EmptyOutput";
    case ErrorCode::Unsupported: return "Unsupported";
  }
  return "Unknown";
}

/// Every recoverable failure in the library is reported through this type.
/// The message always starts with the code name so that callers logging
/// `what()` get a greppable token.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace moldgen
