#pragma once

#include <stdexcept>
#include <string>

namespace negkit {

// Every recoverable failure raised by the library carries one of these kinds.
// The CLI maps UsageError to exit code 2 and every other kind to exit code 1;
// success is exit code 0.  The README lists the full table.
enum class ErrKind {
  // cli / plumbing
  UsageError,
  IoError,
  FormatError,
  MalformedConfig,
  UnknownKey,
  // text parsing
  EmptyCaption,
  // merging
  DimensionMismatch,
  NonFiniteInput,
  EmptySequence,
  NoCue,
  MultipleCues,
  ZeroAlignment,
  // adapter
  UnknownScheme,
  ShapeMismatch,
  RowNotNormalized,
  // detection metrics
  InvalidBox,
  MixedImages,
  NoPositiveQueries,
  NoNegativeQueries,
  EmptyCandidates,
  // dataset pipeline
  ClientError,
  SchemaError,
  RetryExhausted,
  UnparsableAnswer,
  NoEligibleRegions,
  BoxOutOfBounds,
  EmptyCorpus,
};

const char* to_string(ErrKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrKind kind, const std::string& message);
  ErrKind kind() const { return kind_; }

 private:
  ErrKind kind_;
};

// Convenience used throughout: throw Error with a formatted "Kind: msg" what().
[[noreturn]] void fail(ErrKind kind, const std::string& message);

}  // namespace negkit
