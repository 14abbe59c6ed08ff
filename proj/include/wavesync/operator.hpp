#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wavesync/vec.hpp"

namespace wavesync {

inline constexpr double kDefaultMaxSpeed = 1.0;
inline constexpr double kDefaultHoldTimeout = 0.25;

enum class CommandSource { kProportional, kScripted, kReplay, kLive };

struct CommandSample {
  Vec2 u;
  double t = 0.0;
  CommandSource source = CommandSource::kLive;
};

/// Scales u down to magnitude u_max if it is longer, keeping its direction.
Vec2 saturate(Vec2 u, double u_max);

/// u_h = K (q_r - z), saturated.
Vec2 proportional_command(Vec2 q_r, Vec2 z, double gain, double u_max = kDefaultMaxSpeed);

/// Zero-order hold of the newest sample at or before `now`, or zero once it is
/// older than `hold_timeout`.
Vec2 live_command(std::span<const CommandSample> stream, double now, double hold_timeout = kDefaultHoldTimeout);

struct ScriptSegment {
  double start = 0.0;
  double end = 0.0;
  Vec2 u;
};

/// Piecewise-constant command schedule over half-open intervals [start, end).
class Schedule {
 public:
  Schedule() = default;
  /// Throws OverlappingSegments if two intervals intersect.
  explicit Schedule(std::vector<ScriptSegment> segments);

  [[nodiscard]] Vec2 at(double t) const;
  [[nodiscard]] std::span<const ScriptSegment> segments() const noexcept { return segments_; }

 private:
  std::vector<ScriptSegment> segments_;
};

inline Vec2 scripted_command(const Schedule& schedule, double t) { return schedule.at(t); }

/// Last-writer-wins mailbox between the session server and the stepping loop.
/// Also keeps every accepted sample for the session record.
class LiveAdapter {
 public:
  void submit(const CommandSample& sample);
  [[nodiscard]] Vec2 command(double now, double hold_timeout) const;
  [[nodiscard]] std::vector<CommandSample> history() const;
  void clear();

 private:
  mutable std::mutex mutex_;
  std::optional<CommandSample> latest_;
  std::vector<CommandSample> history_;
};

struct ProportionalOperator {
  double gain = 0.5;
  double u_max = kDefaultMaxSpeed;
};

struct ScriptedOperator {
  Schedule schedule;
  double u_max = kDefaultMaxSpeed;
};

/// Replays one command per simulation step; zero after the end.
struct ReplayOperator {
  std::vector<Vec2> commands;
  std::string source;
};

struct LiveOperator {
  std::shared_ptr<LiveAdapter> adapter;
  double hold_timeout = kDefaultHoldTimeout;
  double u_max = kDefaultMaxSpeed;
};

using OperatorSpec = std::variant<ProportionalOperator, ScriptedOperator, ReplayOperator, LiveOperator>;

struct OperatorInput {
  std::int64_t step = 0;
  double t = 0.0;
  Vec2 q_r;
  Vec2 z;
};

Vec2 operator_command(const OperatorSpec& spec, const OperatorInput& input);

/// epsilon in the input-strict-passivity bound; K for the proportional law,
/// zero for operators with no known margin.
double passivity_margin(const OperatorSpec& spec);

std::string_view operator_kind(const OperatorSpec& spec);

}  // namespace wavesync
