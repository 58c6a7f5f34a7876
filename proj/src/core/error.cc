#include "revtime/core/error.h"

namespace revtime {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedJson: return "MalformedJson";
    case ErrorCode::kHttpError: return "HttpError";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kNotCompleted: return "NotCompleted";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kUnsupportedEstimator: return "UnsupportedEstimator";
    case ErrorCode::kFeatureMismatch: return "FeatureMismatch";
    case ErrorCode::kAllPointsFailed: return "AllPointsFailed";
    case ErrorCode::kTooFewRecords: return "TooFewRecords";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNonPositiveActual: return "NonPositiveActual";
    case ErrorCode::kAllZeroDifferences: return "AllZeroDifferences";
    case ErrorCode::kTooFewPairs: return "TooFewPairs";
    case ErrorCode::kZeroPooledVariance: return "ZeroPooledVariance";
    case ErrorCode::kTooFewGroups: return "TooFewGroups";
    case ErrorCode::kTooFewObservations: return "TooFewObservations";
    case ErrorCode::kUnknownUnit: return "UnknownUnit";
    case ErrorCode::kConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace revtime
