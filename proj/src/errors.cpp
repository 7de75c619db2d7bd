#include "negkit/errors.hpp"

namespace negkit {

const char* to_string(ErrKind kind) {
  switch (kind) {
    case ErrKind::UsageError: return "UsageError";
    case ErrKind::IoError: return "IoError";
    case ErrKind::FormatError: return "FormatError";
    case ErrKind::MalformedConfig: return "MalformedConfig";
    case ErrKind::UnknownKey: return "UnknownKey";
    case ErrKind::EmptyCaption: return "EmptyCaption";
    case ErrKind::DimensionMismatch: return "DimensionMismatch";
    case ErrKind::NonFiniteInput: return "NonFiniteInput";
    case ErrKind::EmptySequence: return "EmptySequence";
    case ErrKind::NoCue: return "NoCue";
    case ErrKind::MultipleCues: return "MultipleCues";
    case ErrKind::ZeroAlignment: return "ZeroAlignment";
    case ErrKind::UnknownScheme: return "UnknownScheme";
    case ErrKind::ShapeMismatch: return "ShapeMismatch";
    case ErrKind::RowNotNormalized: return "RowNotNormalized";
    case ErrKind::InvalidBox: return "InvalidBox";
    case ErrKind::MixedImages: return "MixedImages";
    case ErrKind::NoPositiveQueries: return "NoPositiveQueries";
    case ErrKind::NoNegativeQueries: return "NoNegativeQueries";
    case ErrKind::EmptyCandidates: return "EmptyCandidates";
    case ErrKind::ClientError: return "ClientError";
    case ErrKind::SchemaError: return "SchemaError";
    case ErrKind::RetryExhausted: return "RetryExhausted";
    case ErrKind::UnparsableAnswer: return "UnparsableAnswer";
    case ErrKind::NoEligibleRegions: return "NoEligibleRegions";
    case ErrKind::BoxOutOfBounds: return "BoxOutOfBounds";
    case ErrKind::EmptyCorpus: return "EmptyCorpus";
  }
  return "UnknownError";
}

Error::Error(ErrKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace negkit
