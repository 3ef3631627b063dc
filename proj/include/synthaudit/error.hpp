#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace synthaudit {

// Machine-parsable failure categories. The CLI prints these as the first
// token of its single-line error message.
enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kFormat,
  kDuplicateId,
  kEmptyText,
  kEmptyCodes,
  kSourceMismatch,
  kEmptyCorpus,
  kNotFound,
  kDimMismatch,
  kProvider,
  kExtraction,
  kParse,
  kEndpoint,
  kConvergence,
  kNumerical,
  kIncomplete,
  kConfig,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace synthaudit
