#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "wavesync/model.hpp"

namespace wavesync {

/// Storage values at one instant. robot and channel entries are the shifted
/// (error-coordinate) storages; total = (sum robot + sum channel) / m.
struct EnergyLedger {
  std::vector<double> robot;
  std::vector<double> channel;
  double total = 0.0;
  double human_integral = 0.0;  ///< integral of (-zbar' u_h - eps |zbar|^2)
  double energy = 0.0;          ///< total + human_integral (constant offset dropped)
};

/// Channel quantities on one edge at one instant. "ij" is the lower-index end.
struct EdgeSnapshot {
  Vec4 r_ij;
  Vec4 p_ij;
  Vec4 r_ji;
  Vec4 p_ji;
  Vec4 s_plus;   ///< s+_ij sent by side i
  Vec4 s_minus;  ///< s-_ji sent by side j
};

struct StepRecord {
  std::int64_t step = 0;
  double t = 0.0;
  std::vector<RobotState> states;
  Vec2 z;
  Vec2 u_h;
  std::vector<EdgeSnapshot> edges;
  EnergyLedger ledger;
  /// (S(t + dt) - S(t)) / dt - zbar' u_h over the step leaving this record; NaN on the last.
  double residual = std::numeric_limits<double>::quiet_NaN();
};

struct PassivityViolation {
  std::int64_t step = 0;
  double t = 0.0;
  double residual = 0.0;
  double tolerance = 0.0;
};

/// Append-only per-step log on a uniform grid.
struct TrajectoryLog {
  double dt = 0.0;
  Vec2 q_r;
  double residual_tolerance = 0.0;
  std::vector<StepRecord> records;
  std::vector<PassivityViolation> violations;
};

}  // namespace wavesync
