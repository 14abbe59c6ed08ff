#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "wavesync/controller.hpp"
#include "wavesync/delay_line.hpp"
#include "wavesync/monitor.hpp"
#include "wavesync/scenario.hpp"
#include "wavesync/trajectory.hpp"

namespace wavesync {

inline constexpr double kBlowupLimit = 1e6;

enum class ExecPolicy { kSerial, kParallel };

/// The two directions of one edge. `forward` runs from the lower-index agent
/// to the higher one and carries s+ (or x_i in raw-delay mode); `backward`
/// carries s- (or x_j).
struct ChannelState {
  DelayLine forward;
  DelayLine backward;
};

struct WorldState {
  std::int64_t step = 0;
  double t = 0.0;
  std::vector<RobotState> states;
  std::vector<ChannelState> channels;  ///< empty in delay-free mode
};

/// Scenario initial conditions with empty channels (zero wave history). In
/// raw-delay mode the lines are primed with the initial states instead.
WorldState initial_world(const Scenario& scenario);

/// Every agent at `consensus` and every delay line filled with the stationary
/// waves that agree with it.
WorldState equilibrium_world(const Scenario& scenario, const RobotState& consensus);

/// Everything computed from one instant before the state moves.
struct Evaluation {
  std::vector<EdgeSnapshot> edges;
  std::vector<ControlOutput> outputs;
  Vec2 u_h;
};

namespace kernels {

/// Reads both incoming lines of every edge and resolves r, p and outgoing waves.
void resolve_edges(ExecPolicy policy, const Scenario& scenario, const WorldState& world,
                   std::span<EdgeSnapshot> out);
/// mu_i = sum of p over incidences, in neighbor-list order.
void accumulate_agents(ExecPolicy policy, const Scenario& scenario, const WorldState& world,
                       std::span<const EdgeSnapshot> edges, Vec2 u_h, std::span<ControlOutput> out);
/// Explicit Euler on every agent. Throws NumericBlowup.
void integrate(ExecPolicy policy, std::span<RobotState> states, std::span<const ControlOutput> derivatives,
               double dt, double t);
/// Pushes this instant's outgoing samples onto every line.
void push_channels(ExecPolicy policy, const Scenario& scenario, WorldState& world,
                   std::span<const EdgeSnapshot> edges);

}  // namespace kernels

Evaluation evaluate(const WorldState& world, const Scenario& scenario, Vec2 u_h,
                    ExecPolicy policy = ExecPolicy::kSerial);
/// Integrates, pushes the outgoing samples, and moves time forward by dt.
void advance(WorldState& world, const Scenario& scenario, const Evaluation& eval,
             ExecPolicy policy = ExecPolicy::kSerial);
/// One explicit-Euler step of the closed loop.
WorldState step(WorldState world, const Scenario& scenario, Vec2 u_h, ExecPolicy policy = ExecPolicy::kSerial);

/// Agent-centric serial implementation of `step`: each robot resolves its own
/// endpoints and calls the controller directly. Kept as the reference the
/// edge-centric kernels are tested against.
WorldState reference_step(WorldState world, const Scenario& scenario, Vec2 u_h);

/// Energy ledger at the current instant, given its evaluation.
EnergyLedger measure_ledger(const WorldState& world, const Scenario& scenario, const Evaluation& eval,
                            double human_integral);

struct RunOptions {
  ExecPolicy policy = ExecPolicy::kSerial;
  bool record_edges = true;
  double residual_tolerance = 0.0;  ///< <= 0 selects residual_tolerance(dt)
  bool fail_fast = false;           ///< throw on the first passivity violation
  std::optional<WorldState> start;  ///< overrides initial_world
};

/// Drives the closed loop one instant at a time, recording as it goes.
class Stepper {
 public:
  explicit Stepper(Scenario scenario, RunOptions options = {});

  /// Records the current instant and, unless it is the last, steps past it.
  /// `u_override` bypasses the scenario operator.
  const StepRecord& tick(std::optional<Vec2> u_override = std::nullopt);
  [[nodiscard]] bool finished() const noexcept { return finished_; }
  [[nodiscard]] const WorldState& world() const noexcept { return world_; }
  [[nodiscard]] const Scenario& scenario() const noexcept { return scenario_; }
  [[nodiscard]] const TrajectoryLog& log() const noexcept { return log_; }
  TrajectoryLog take_log() { return std::move(log_); }

 private:
  Scenario scenario_;
  RunOptions options_;
  WorldState world_;
  TrajectoryLog log_;
  double human_integral_ = 0.0;
  double epsilon_ = 0.0;
  std::int64_t last_step_ = 0;
  bool finished_ = false;
};

TrajectoryLog run(const Scenario& scenario, const RunOptions& options = {});

/// compute_metrics plus the edge diagnostics at the final record.
Metrics summarize(const TrajectoryLog& log, const Scenario& scenario);

/// Scenario whose operator replays the u_h column of `log`.
Scenario with_replayed_commands(Scenario scenario, const TrajectoryLog& log);

/// Index of the first record whose states differ bitwise, if any.
std::optional<std::size_t> first_divergence(const TrajectoryLog& a, const TrajectoryLog& b);

}  // namespace wavesync
