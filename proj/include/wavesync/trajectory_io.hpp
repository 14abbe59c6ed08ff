#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavesync/monitor.hpp"
#include "wavesync/scenario.hpp"
#include "wavesync/trajectory.hpp"

namespace wavesync {

/// Column names of the per-step trajectory CSV for an n-agent run. Order is
/// part of the file format.
std::vector<std::string> trajectory_columns(std::size_t agents);
std::vector<std::string> edge_columns();

/// One row per record: step, t, z, u_h, every agent's q and xi, storages, residual.
void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);
/// Long format: one row per (record, edge).
void write_edges_csv(std::ostream& out, const TrajectoryLog& log, const Graph& graph);
void write_violations_csv(std::ostream& out, const TrajectoryLog& log);

nlohmann::json metrics_to_json(const Metrics& m);
std::string metrics_text(const Metrics& m, const std::string& title);

}  // namespace wavesync
