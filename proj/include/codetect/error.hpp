#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace codetect {

enum class ErrorCode {
  InvalidArgument,
  UnknownWord,
  NoTemplateMatch,
  MalformedRules,
  UnknownPredicate,
  MissingOrientation,
  VideoMismatch,
  EmptyCandidates,
  DegenerateTrack,
  DegenerateCrop,
  DimMismatch,
  MissingDescriptor,
  MissingScore,
  TooLarge,
  Infeasible,
  NoOverlapFrames,
  InsufficientAnnotators,
  SpecInfeasible,
  Io,
  Format,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported as codetect::Error; the code lets callers
// (and the CLI's per-set error entries) distinguish failure kinds.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace codetect
