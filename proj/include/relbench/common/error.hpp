#pragma once

#include <stdexcept>
#include <string>

namespace relbench {

// Machine-readable failure codes; the CLI prints them as `error: <code>: <message>`.
enum class ErrorCode {
  kPath,
  kIo,
  kParse,
  kConfig,
  kPrecondition,
  kConflict,
  kReferential,
  kCollision,
  kProvider,
  kDimensionMismatch,
  kNoAnnotations,
  kMissingIndex,
  kUndefined,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace relbench
