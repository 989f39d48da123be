#include "coda/error.hpp"

namespace coda {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotOnSimplex: return "NotOnSimplex";
    case ErrorCode::ZeroPart: return "ZeroPart";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::LambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorCode::EmptySubcomposition: return "EmptySubcomposition";
    case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::SingleClassTrain: return "SingleClassTrain";
    case ErrorCode::DegenerateBatch: return "DegenerateBatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingLabelColumn: return "MissingLabelColumn";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::NonNumericFeature: return "NonNumericFeature";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CheckpointFormat: return "CheckpointFormat";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace coda
