#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vpgkit {

enum class ErrorCode {
  PartitionOverlap,
  EmptyAlphabet,
  UnknownLetter,
  InvalidInverse,
  InvalidAutomaton,
  PartitionMismatch,
  PartitionViolation,
  InadmissibleWord,
  InfiniteIndex,
  FiniteIndex,
  NotPermutationDfa,
  GroupTooLarge,
  InvalidGroup,
  SymmetricPartition,
  ParseError,
  SchemaViolation,
  UnknownArtifact,
  DuplicateArtifact,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PartitionOverlap: return "PartitionOverlap";
    case ErrorCode::EmptyAlphabet: return "EmptyAlphabet";
    case ErrorCode::UnknownLetter: return "UnknownLetter";
    case ErrorCode::InvalidInverse: return "InvalidInverse";
    case ErrorCode::InvalidAutomaton: return "InvalidAutomaton";
    case ErrorCode::PartitionMismatch: return "PartitionMismatch";
    case ErrorCode::PartitionViolation: return "PartitionViolation";
    case ErrorCode::InadmissibleWord: return "InadmissibleWord";
    case ErrorCode::InfiniteIndex: return "InfiniteIndex";
    case ErrorCode::FiniteIndex: return "FiniteIndex";
    case ErrorCode::NotPermutationDfa: return "NotPermutationDfa";
    case ErrorCode::GroupTooLarge: return "GroupTooLarge";
    case ErrorCode::InvalidGroup: return "InvalidGroup";
    case ErrorCode::SymmetricPartition: return "SymmetricPartition";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnknownArtifact: return "UnknownArtifact";
    case ErrorCode::DuplicateArtifact: return "DuplicateArtifact";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above; the
/// message is the code name followed by detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail)),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace vpgkit
