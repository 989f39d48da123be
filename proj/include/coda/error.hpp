#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace coda {

enum class ErrorCode {
  AllZero,
  NegativeEntry,
  DimensionTooSmall,
  DimensionMismatch,
  NotOnSimplex,
  ZeroPart,
  NonFinite,
  LambdaOutOfRange,
  EmptySubcomposition,
  EmptyTrainingSet,
  EmptyDataset,
  EmptyInput,
  ClassTooSmall,
  SingleClass,
  SingleClassTrain,
  DegenerateBatch,
  ParseError,
  MissingLabelColumn,
  RaggedRow,
  NonNumericFeature,
  IoError,
  CheckpointFormat,
  InvalidArgument,
};

std::string_view error_name(ErrorCode code) noexcept;

// Every failure in the library is reported through this type; `code()` is
// the stable identifier, `what()` carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace coda
