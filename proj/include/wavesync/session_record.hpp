#pragma once

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavesync/monitor.hpp"
#include "wavesync/operator.hpp"
#include "wavesync/scenario.hpp"
#include "wavesync/trajectory.hpp"

namespace wavesync {

/// Everything needed to re-run a session and check it: the scenario as it was
/// configured, the u_h actually applied at every step, the raw command stream
/// with arrival times, and the state trajectory it produced.
struct SessionRecord {
  nlohmann::json scenario;       ///< scenario_to_json of the session scenario
  std::vector<Vec2> u_h;         ///< one per record
  std::vector<CommandSample> commands;
  TrajectoryLog trajectory;      ///< step, t, z, u_h and states only
  nlohmann::json metrics;
};

SessionRecord make_record(const Scenario& scenario, const TrajectoryLog& log,
                          std::vector<CommandSample> commands = {});

nlohmann::json record_to_json(const SessionRecord& record);
/// Throws BadScenario on a missing field or a truncated document.
SessionRecord record_from_json(const nlohmann::json& doc);

void save_record(const SessionRecord& record, const std::filesystem::path& path);
SessionRecord load_record(const std::filesystem::path& path);

/// The record's scenario with its operator replaced by the recorded u_h and
/// its duration cut to the recorded length.
Scenario replay_scenario(const SessionRecord& record);

/// Re-runs the record and returns the fresh log. Throws ReplayDivergence at the
/// first record whose time, input or state differs bitwise from the original.
TrajectoryLog replay_record(const SessionRecord& record);

}  // namespace wavesync
