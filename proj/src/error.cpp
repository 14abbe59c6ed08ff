#include "wavesync/error.hpp"

namespace wavesync {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::kSelfLoop: return "SelfLoop";
    case ErrorCode::kEmptyAccessibleSet: return "EmptyAccessibleSet";
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kNonPositiveGain: return "NonPositiveGain";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kSingularCoupling: return "SingularCoupling";
    case ErrorCode::kCadenceViolation: return "CadenceViolation";
    case ErrorCode::kInvalidDelay: return "InvalidDelay";
    case ErrorCode::kNumericBlowup: return "NumericBlowup";
    case ErrorCode::kInsufficientHistory: return "InsufficientHistory";
    case ErrorCode::kOverlappingSegments: return "OverlappingSegments";
    case ErrorCode::kBadScenario: return "BadScenario";
    case ErrorCode::kReplayDivergence: return "ReplayDivergence";
    case ErrorCode::kMalformedMessage: return "MalformedMessage";
    case ErrorCode::kPortInUse: return "PortInUse";
    case ErrorCode::kSweepTooLarge: return "SweepTooLarge";
    case ErrorCode::kPassivityViolation: return "PassivityViolation";
  }
  return "Unknown";
}

}  // namespace wavesync
