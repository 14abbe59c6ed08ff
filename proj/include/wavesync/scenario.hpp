#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wavesync/model.hpp"
#include "wavesync/operator.hpp"

namespace wavesync {

/// How neighbor references are produced.
enum class ChannelMode {
  kDelayFree,   ///< exact neighbor states, no channel
  kScattering,  ///< wave variables over delay lines
  kRawDelay,    ///< delayed (q_j, xi_j) used directly; unsafe, kept as a negative control
};

std::string_view to_string(ChannelMode mode);

/// Render-only geometry.
struct Obstacle {
  Vec2 center;
  double radius = 0.0;
};

struct Scenario {
  std::string name;
  Graph graph;
  Gains gains;
  double delay = 0.0;
  std::vector<double> edge_delays;  ///< per-edge override; empty means `delay` everywhere
  double dt = 0.01;
  double duration = 0.0;
  std::vector<RobotState> initial;
  Vec2 q_r;
  std::vector<Vec2> biases;
  std::vector<Obstacle> obstacles;
  OperatorSpec op = ProportionalOperator{};
  ChannelMode mode = ChannelMode::kScattering;

  [[nodiscard]] double edge_delay(std::size_t edge) const {
    return edge_delays.empty() ? delay : edge_delays.at(edge);
  }
  [[nodiscard]] std::int64_t step_count() const;
  /// Throws BadScenario on any inconsistency.
  void validate() const;
};

/// Six agents on a 2x3 grid with one diagonal, agents 3 and 4 accessible, and
/// the gains, delay, biases and initial conditions of the reference experiment.
Scenario reference_scenario(ChannelMode mode = ChannelMode::kScattering);

/// Parses the versioned scenario document. Relative replay paths resolve
/// against `base_dir`. Throws BadScenario naming the offending field.
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);
/// Inverse of parse_scenario. Live operators serialize as their kind only.
nlohmann::json scenario_to_json(const Scenario& scenario);

/// Parses JSON text, reporting syntax errors with line and column.
nlohmann::json parse_json_text(const std::string& text, const std::string& origin);

}  // namespace wavesync
