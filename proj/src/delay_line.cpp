#include "wavesync/delay_line.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavesync/error.hpp"

namespace wavesync {

namespace {
constexpr double kGridTolerance = 1e-9;
}

DelayLine::DelayLine(double delay, double dt) : delay_(delay), dt_(dt), depth_(0) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error(ErrorCode::kInvalidDelay, "dt must be positive");
  if (!(delay >= 0.0) || !std::isfinite(delay)) throw Error(ErrorCode::kInvalidDelay, "delay must be >= 0");
  const double ratio = delay / dt;
  const double rounded = std::round(ratio);
  if (std::fabs(ratio - rounded) >= kGridTolerance) {
    throw Error(ErrorCode::kInvalidDelay,
                "delay " + std::to_string(delay) + " is not an integer multiple of dt " + std::to_string(dt));
  }
  depth_ = static_cast<std::size_t>(rounded);
}

std::int64_t DelayLine::tick_of(double t) const {
  const double ratio = t / dt_;
  const double rounded = std::round(ratio);
  if (!std::isfinite(ratio) || std::fabs(ratio - rounded) > 1e-6) {
    throw Error(ErrorCode::kCadenceViolation, "timestamp " + std::to_string(t) + " is off the dt grid");
  }
  return static_cast<std::int64_t>(rounded);
}

void DelayLine::push(const Vec4& s, double t) { push_tick(s, tick_of(t)); }

void DelayLine::push_tick(const Vec4& s, std::int64_t tick) {
  if (!buffer_.empty() && tick <= buffer_.back().tick) {
    throw Error(ErrorCode::kCadenceViolation, "non-monotone push at tick " + std::to_string(tick));
  }
  buffer_.push_back({s, tick});
  prune();
}

void DelayLine::prune() {
  // Reads never go earlier than the newest push, so the oldest sample that can
  // still be returned is the last one at or before newest - depth.
  const std::int64_t horizon = buffer_.back().tick - static_cast<std::int64_t>(depth_);
  while (buffer_.size() >= 2 && buffer_[1].tick <= horizon) {
    dropped_ = true;
    last_dropped_tick_ = buffer_.front().tick;
    buffer_.pop_front();
  }
}

Vec4 DelayLine::read(double t) const { return read_tick(tick_of(t)); }

Vec4 DelayLine::read_tick(std::int64_t tick) const {
  const std::int64_t target = tick - static_cast<std::int64_t>(depth_);
  auto it = std::upper_bound(buffer_.begin(), buffer_.end(), target,
                             [](std::int64_t value, const WaveSample& s) { return value < s.tick; });
  if (it == buffer_.begin()) {
    if (dropped_ && target >= last_dropped_tick_) {
      throw Error(ErrorCode::kCadenceViolation, "read at tick " + std::to_string(tick) + " behind the buffer");
    }
    return Vec4{};
  }
  return std::prev(it)->s;
}

Vec4 DelayLine::push_pop(const Vec4& s, double t) {
  const std::int64_t tick = tick_of(t);
  push_tick(s, tick);
  return read_tick(tick);
}

std::vector<Vec4> DelayLine::window_before(std::int64_t tick) const {
  std::vector<Vec4> out(depth_);
  const std::int64_t first = tick - static_cast<std::int64_t>(depth_);
  for (const WaveSample& s : buffer_) {
    if (s.tick >= first && s.tick < tick) out[static_cast<std::size_t>(s.tick - first)] = s.s;
  }
  return out;
}

void DelayLine::prefill(const Vec4& s, std::int64_t first_tick, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) push_tick(s, first_tick + static_cast<std::int64_t>(k));
}

}  // namespace wavesync
