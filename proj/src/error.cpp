#include "synthaudit/error.hpp"

namespace synthaudit {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kFormat: return "format";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kEmptyText: return "empty_text";
    case ErrorCode::kEmptyCodes: return "empty_codes";
    case ErrorCode::kSourceMismatch: return "source_mismatch";
    case ErrorCode::kEmptyCorpus: return "empty_corpus";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kDimMismatch: return "dim_mismatch";
    case ErrorCode::kProvider: return "provider";
    case ErrorCode::kExtraction: return "extraction";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kEndpoint: return "endpoint";
    case ErrorCode::kConvergence: return "convergence";
    case ErrorCode::kNumerical: return "numerical";
    case ErrorCode::kIncomplete: return "incomplete";
    case ErrorCode::kConfig: return "config";
  }
  return "unknown";
}

}  // namespace synthaudit
