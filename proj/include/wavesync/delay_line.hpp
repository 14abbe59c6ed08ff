#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <vector>

#include "wavesync/vec.hpp"

namespace wavesync {

struct WaveSample {
  Vec4 s;
  std::int64_t tick = 0;  ///< timestamp in units of dt
};

/// Constant-delay FIFO on a fixed time grid. A read at time t returns the most
/// recent sample pushed at or before t - T, or the zero wave if there is none
/// (zero pre-history). T must be an integer multiple of dt.
class DelayLine {
 public:
  DelayLine(double delay, double dt);

  [[nodiscard]] double delay() const noexcept { return delay_; }
  [[nodiscard]] double dt() const noexcept { return dt_; }
  [[nodiscard]] std::size_t depth() const noexcept { return depth_; }

  /// Grid index of t. Throws CadenceViolation for off-grid times.
  [[nodiscard]] std::int64_t tick_of(double t) const;

  void push(const Vec4& s, double t);
  void push_tick(const Vec4& s, std::int64_t tick);
  [[nodiscard]] Vec4 read(double t) const;
  [[nodiscard]] Vec4 read_tick(std::int64_t tick) const;

  /// Push then read at the same instant; with T = 0 the input passes through.
  Vec4 push_pop(const Vec4& s, double t);

  /// Samples for ticks [tick - depth, tick - 1], zero where nothing was pushed.
  [[nodiscard]] std::vector<Vec4> window_before(std::int64_t tick) const;

  /// Fills ticks [first_tick, first_tick + count) with a constant value.
  void prefill(const Vec4& s, std::int64_t first_tick, std::size_t count);

  [[nodiscard]] std::size_t buffered() const noexcept { return buffer_.size(); }

 private:
  void prune();

  double delay_;
  double dt_;
  std::size_t depth_;
  std::deque<WaveSample> buffer_;
  bool dropped_ = false;
  std::int64_t last_dropped_tick_ = 0;
};

}  // namespace wavesync
