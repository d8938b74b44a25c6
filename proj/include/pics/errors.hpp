#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pics {

enum class ErrorCode {
  TooFewKnots,
  DegenerateKnots,
  SingularTangent,
  InsufficientHistory,
  InvalidEdit,
  InvalidArgument,
  OutOfBounds,
  DimensionMismatch,
  UnsupportedFormat,
  CorruptFile,
  SchemaVersionMismatch,
  MalformedDocument,
  UnknownFixture,
  UnknownPreset,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::TooFewKnots: return "TooFewKnots";
    case ErrorCode::DegenerateKnots: return "DegenerateKnots";
    case ErrorCode::SingularTangent: return "SingularTangent";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::InvalidEdit: return "InvalidEdit";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::CorruptFile: return "CorruptFile";
    case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::UnknownFixture: return "UnknownFixture";
    case ErrorCode::UnknownPreset: return "UnknownPreset";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Base of every error the engine raises. `code()` identifies the failure
/// kind so front ends can map it to exit codes or HTTP statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

template <ErrorCode Code>
class ErrorOf : public Error {
 public:
  explicit ErrorOf(const std::string& what) : Error(Code, what) {}
};

using TooFewKnots = ErrorOf<ErrorCode::TooFewKnots>;
using DegenerateKnots = ErrorOf<ErrorCode::DegenerateKnots>;
using SingularTangent = ErrorOf<ErrorCode::SingularTangent>;
using InsufficientHistory = ErrorOf<ErrorCode::InsufficientHistory>;
using InvalidEdit = ErrorOf<ErrorCode::InvalidEdit>;
using InvalidArgument = ErrorOf<ErrorCode::InvalidArgument>;
using OutOfBounds = ErrorOf<ErrorCode::OutOfBounds>;
using DimensionMismatch = ErrorOf<ErrorCode::DimensionMismatch>;
using UnsupportedFormat = ErrorOf<ErrorCode::UnsupportedFormat>;
using CorruptFile = ErrorOf<ErrorCode::CorruptFile>;
using SchemaVersionMismatch = ErrorOf<ErrorCode::SchemaVersionMismatch>;
using MalformedDocument = ErrorOf<ErrorCode::MalformedDocument>;
using UnknownFixture = ErrorOf<ErrorCode::UnknownFixture>;
using UnknownPreset = ErrorOf<ErrorCode::UnknownPreset>;
using IoError = ErrorOf<ErrorCode::IoError>;

}  // namespace pics
