#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace geolog {

// Stable numeric values: they are mirrored by the C API's geolog_status.
enum class ErrorCode : int {
  kHeaderMismatch = 10,
  kMalformedRow = 11,
  kInvalidEncoding = 12,
  kBadNumeric = 13,
  kMissingId = 14,
  kDuplicateId = 15,
  kStorageError = 16,
  kDbError = 20,
  kUnknownTable = 21,
  kReadOnlyViolation = 22,
  kNoSqlFound = 23,
  kStepParseError = 24,
  kBackendUnavailable = 30,
  kScriptExhausted = 31,
  kInvalidRequest = 32,
  kEmptyInput = 40,
  kEmptyCorpus = 41,
  kEmptyQuestion = 50,
  kUnknownExchange = 51,
  kConfigError = 52,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace geolog
