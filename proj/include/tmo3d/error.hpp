#pragma once

#include <stdexcept>
#include <string>

namespace tmo3d {

enum class ErrorCode {
  kParse,            // malformed input file
  kValidation,       // value violates a domain invariant
  kConfig,           // bad or unknown configuration key
  kIo,               // filesystem failure
  kOutOfRange,       // interpolation outside the pose stream
  kDomain,           // pixel outside image bounds
  kSequenceTooShort, // not enough ego travel to triangulate
  kNoObservations,
  kNoValidPose,
  kNeverVisible,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kValidation: return "validation error";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kIo: return "I/O error";
    case ErrorCode::kOutOfRange: return "out of range";
    case ErrorCode::kDomain: return "domain error";
    case ErrorCode::kSequenceTooShort: return "sequence too short";
    case ErrorCode::kNoObservations: return "no observations";
    case ErrorCode::kNoValidPose: return "no valid pose";
    case ErrorCode::kNeverVisible: return "never visible";
  }
  return "error";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Input-side failures the CLI reports with exit code 1.
  bool is_validation() const noexcept {
    return code_ == ErrorCode::kParse || code_ == ErrorCode::kValidation ||
           code_ == ErrorCode::kConfig;
  }

 private:
  ErrorCode code_;
};

}  // namespace tmo3d
