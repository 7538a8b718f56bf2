#include "nalloc/error.hpp"

namespace nalloc {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::DuplicateDate: return "DuplicateDate";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::EmptySplit: return "EmptySplit";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DivergedLoss: return "DivergedLoss";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::NegativeDiagonal: return "NegativeDiagonal";
    case ErrorCode::SingularRisk: return "SingularRisk";
    case ErrorCode::ZeroAssets: return "ZeroAssets";
    case ErrorCode::InsufficientWarmup: return "InsufficientWarmup";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

}  // namespace nalloc
