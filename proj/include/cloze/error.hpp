#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cloze {

enum class ErrorCode {
  ZeroSyllables,
  NoEligibleWords,
  NoDecoyAvailable,
  MalformedResponse,
  UntrainedModel,
  TrainingLeakage,
  AllMissed,
  InsufficientBuckets,
  NotNormalized,
  StorageFailure,
  ValidationFailure,
  UnknownSession,
  UnknownTrial,
  AlreadyAnswered,
  CorpusEmpty,
  UnknownSubjectKind,
  IoFailure,
  MalformedFrontMatter,
  SchemaMismatch,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroSyllables: return "ZeroSyllables";
    case ErrorCode::NoEligibleWords: return "NoEligibleWords";
    case ErrorCode::NoDecoyAvailable: return "NoDecoyAvailable";
    case ErrorCode::MalformedResponse: return "MalformedResponse";
    case ErrorCode::UntrainedModel: return "UntrainedModel";
    case ErrorCode::TrainingLeakage: return "TrainingLeakage";
    case ErrorCode::AllMissed: return "AllMissed";
    case ErrorCode::InsufficientBuckets: return "InsufficientBuckets";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::ValidationFailure: return "ValidationFailure";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::UnknownTrial: return "UnknownTrial";
    case ErrorCode::AlreadyAnswered: return "AlreadyAnswered";
    case ErrorCode::CorpusEmpty: return "CorpusEmpty";
    case ErrorCode::UnknownSubjectKind: return "UnknownSubjectKind";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::MalformedFrontMatter: return "MalformedFrontMatter";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

// Every failure in the library is reported as an Error carrying a stable code;
// the HTTP layer maps the code straight into its error envelope.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace cloze
