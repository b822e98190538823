#include "lavlev/errors.hpp"

namespace lavlev {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kDegenerateBasis: return "DegenerateBasis";
    case ErrorCode::kUnbounded: return "Unbounded";
    case ErrorCode::kMaxIterations: return "MaxIterations";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kEmptyPartition: return "EmptyPartition";
    case ErrorCode::kZeroScale: return "ZeroScale";
    case ErrorCode::kUnsupportedKind: return "UnsupportedKind";
    case ErrorCode::kDisconnectedBus: return "DisconnectedBus";
    case ErrorCode::kUnknownLabel: return "UnknownLabel";
    case ErrorCode::kInvalidNetwork: return "InvalidNetwork";
    case ErrorCode::kParse: return "Parse";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::optional<long> rank)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      rank_(rank) {}

}  // namespace lavlev
