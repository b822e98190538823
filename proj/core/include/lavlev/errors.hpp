#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace lavlev {

enum class ErrorCode {
  kRankDeficient,
  kNonFinite,
  kDimensionMismatch,
  kDegenerateBasis,
  kUnbounded,
  kMaxIterations,
  kTooLarge,
  kIndexOutOfRange,
  kInvalidArgument,
  kEmptyPartition,
  kZeroScale,
  kUnsupportedKind,
  kDisconnectedBus,
  kUnknownLabel,
  kInvalidNetwork,
  kParse,
};

const char* to_string(ErrorCode code);

// Single exception type for the library. RankDeficient errors carry the
// numerical rank that was found.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<long> rank = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<long> rank() const noexcept { return rank_; }

 private:
  ErrorCode code_;
  std::optional<long> rank_;
};

}  // namespace lavlev
