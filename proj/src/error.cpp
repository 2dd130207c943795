#include "geolog/error.hpp"

namespace geolog {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kHeaderMismatch: return "HeaderMismatch";
    case ErrorCode::kMalformedRow: return "MalformedRow";
    case ErrorCode::kInvalidEncoding: return "InvalidEncoding";
    case ErrorCode::kBadNumeric: return "BadNumeric";
    case ErrorCode::kMissingId: return "MissingId";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kStorageError: return "StorageError";
    case ErrorCode::kDbError: return "DbError";
    case ErrorCode::kUnknownTable: return "UnknownTable";
    case ErrorCode::kReadOnlyViolation: return "ReadOnlyViolation";
    case ErrorCode::kNoSqlFound: return "NoSqlFound";
    case ErrorCode::kStepParseError: return "StepParseError";
    case ErrorCode::kBackendUnavailable: return "BackendUnavailable";
    case ErrorCode::kScriptExhausted: return "ScriptExhausted";
    case ErrorCode::kInvalidRequest: return "InvalidRequest";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kEmptyQuestion: return "EmptyQuestion";
    case ErrorCode::kUnknownExchange: return "UnknownExchange";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace geolog
