#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "wavesync/monitor.hpp"
#include "wavesync/scenario.hpp"

namespace wavesync {

inline constexpr std::size_t kMaxSweepRuns = 10000;

/// Axis names accepted by a sweep, in the column order of the output.
inline const std::vector<std::string>& sweep_axis_names() {
  static const std::vector<std::string> names{"T", "a", "b", "sigma", "K", "dt"};
  return names;
}

struct SweepSpec {
  Scenario base;
  std::map<std::string, std::vector<double>> axes;  ///< keys from sweep_axis_names()
  bool force = false;                               ///< lift the kMaxSweepRuns cap

  /// Throws BadScenario on an unknown axis or an empty value list, and
  /// SweepTooLarge if the product exceeds the cap without `force`.
  void validate() const;
  [[nodiscard]] std::size_t run_count() const;
};

struct SweepPoint {
  std::map<std::string, double> values;  ///< only the swept axes
};

struct SweepRow {
  SweepPoint point;
  std::optional<Metrics> metrics;
  std::string error;  ///< set when the run failed; metrics is then empty
};

/// Cartesian product in lexicographic order, last axis fastest. Empty axes
/// give one point: the base scenario.
std::vector<SweepPoint> sweep_points(const SweepSpec& spec);

/// The base scenario with one point's values applied. Throws BadScenario if
/// the result is inconsistent (e.g. K on a non-proportional operator).
Scenario apply_point(const Scenario& base, const SweepPoint& point);

/// Runs every point on the OpenMP worker pool. Each run is serial and
/// deterministic, so rows do not depend on the thread count. A failing run
/// fills its row's error and the sweep carries on.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

std::vector<std::string> sweep_columns(const SweepSpec& spec);
void write_sweep_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows);

}  // namespace wavesync
