#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace revtime {

// Categories double as CLI exit-code classes.
enum class ErrorCode {
  kMalformedJson,
  kHttpError,
  kNotFound,
  kSchemaError,
  kIoError,
  kNotCompleted,
  kEmptyInput,
  kInvalidArgument,
  kConvergenceFailure,
  kEmptyTrainingSet,
  kUnsupportedEstimator,
  kFeatureMismatch,
  kAllPointsFailed,
  kTooFewRecords,
  kLengthMismatch,
  kNonPositiveActual,
  kAllZeroDifferences,
  kTooFewPairs,
  kZeroPooledVariance,
  kTooFewGroups,
  kTooFewObservations,
  kUnknownUnit,
  kConfigError,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace revtime
