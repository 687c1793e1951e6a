#pragma once

#include <stdexcept>
#include <string>

namespace detectkit {

enum class ErrorCode {
  InvalidArgument,
  EmptyDocument,
  InvalidEncoding,
  DegenerateSplit,
  ParseError,
  MissingField,
  EmptyEmbedding,
  EmptyVocabulary,
  DimensionMismatch,
  SingleClass,
  AurocUndefined,
  SchemaMismatch,
  Io,
};

// Coarse grouping used by the CLI to map failures onto exit codes.
enum class ErrorCategory { Config, Data, Io };

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept;

 private:
  ErrorCode code_;
};

}  // namespace detectkit
