#include "relbench/common/error.hpp"

namespace relbench {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kPath: return "path_error";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kConfig: return "config_error";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kConflict: return "conflict";
    case ErrorCode::kReferential: return "referential";
    case ErrorCode::kCollision: return "annotator_collision";
    case ErrorCode::kProvider: return "provider_error";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kNoAnnotations: return "no_annotations";
    case ErrorCode::kMissingIndex: return "missing_index";
    case ErrorCode::kUndefined: return "undefined";
  }
  return "unknown";
}

}  // namespace relbench
