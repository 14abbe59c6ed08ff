#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wavesync {

enum class ErrorCode {
  kDisconnectedGraph,
  kSelfLoop,
  kEmptyAccessibleSet,
  kIndexOutOfRange,
  kNonPositiveGain,
  kNonFinite,
  kSingularCoupling,
  kCadenceViolation,
  kInvalidDelay,
  kNumericBlowup,
  kInsufficientHistory,
  kOverlappingSegments,
  kBadScenario,
  kReplayDivergence,
  kMalformedMessage,
  kPortInUse,
  kSweepTooLarge,
  kPassivityViolation,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wavesync
