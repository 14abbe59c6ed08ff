#include "wavesync/operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavesync/error.hpp"

namespace wavesync {

Vec2 saturate(Vec2 u, double u_max) {
  const double n = norm(u);
  if (n > u_max && n > 0.0) return u * (u_max / n);
  return u;
}

Vec2 proportional_command(Vec2 q_r, Vec2 z, double gain, double u_max) {
  if (!(gain > 0.0)) throw Error(ErrorCode::kNonPositiveGain, "operator gain K must be positive");
  return saturate(gain * (q_r - z), u_max);
}

Vec2 live_command(std::span<const CommandSample> stream, double now, double hold_timeout) {
  for (auto it = stream.rbegin(); it != stream.rend(); ++it) {
    if (it->t <= now) return (now - it->t) > hold_timeout ? Vec2{} : it->u;
  }
  return {};
}

Schedule::Schedule(std::vector<ScriptSegment> segments) : segments_(std::move(segments)) {
  std::sort(segments_.begin(), segments_.end(),
            [](const ScriptSegment& a, const ScriptSegment& b) { return a.start < b.start; });
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    if (!(segments_[k].end > segments_[k].start)) {
      throw Error(ErrorCode::kOverlappingSegments, "segment " + std::to_string(k) + " has end <= start");
    }
    if (k > 0 && segments_[k].start < segments_[k - 1].end) {
      throw Error(ErrorCode::kOverlappingSegments,
                  "segments starting at " + std::to_string(segments_[k - 1].start) + " and " +
                      std::to_string(segments_[k].start) + " overlap");
    }
  }
}

Vec2 Schedule::at(double t) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double value, const ScriptSegment& s) { return value < s.start; });
  if (it == segments_.begin()) return {};
  --it;
  return t < it->end ? it->u : Vec2{};
}

void LiveAdapter::submit(const CommandSample& sample) {
  std::lock_guard lock(mutex_);
  latest_ = sample;
  history_.push_back(sample);
}

Vec2 LiveAdapter::command(double now, double hold_timeout) const {
  std::lock_guard lock(mutex_);
  if (!latest_ || latest_->t > now) return {};
  return (now - latest_->t) > hold_timeout ? Vec2{} : latest_->u;
}

std::vector<CommandSample> LiveAdapter::history() const {
  std::lock_guard lock(mutex_);
  return history_;
}

void LiveAdapter::clear() {
  std::lock_guard lock(mutex_);
  latest_.reset();
  history_.clear();
}

namespace {

struct CommandVisitor {
  const OperatorInput& in;

  Vec2 operator()(const ProportionalOperator& op) const {
    return proportional_command(in.q_r, in.z, op.gain, op.u_max);
  }
  Vec2 operator()(const ScriptedOperator& op) const { return saturate(op.schedule.at(in.t), op.u_max); }
  Vec2 operator()(const ReplayOperator& op) const {
    if (in.step < 0 || static_cast<std::size_t>(in.step) >= op.commands.size()) return {};
    return op.commands[static_cast<std::size_t>(in.step)];
  }
  Vec2 operator()(const LiveOperator& op) const {
    if (!op.adapter) return {};
    return saturate(op.adapter->command(in.t, op.hold_timeout), op.u_max);
  }
};

}  // namespace

Vec2 operator_command(const OperatorSpec& spec, const OperatorInput& input) {
  return std::visit(CommandVisitor{input}, spec);
}

double passivity_margin(const OperatorSpec& spec) {
  if (const auto* p = std::get_if<ProportionalOperator>(&spec)) return p->gain;
  return 0.0;
}

std::string_view operator_kind(const OperatorSpec& spec) {
  switch (spec.index()) {
    case 0: return "proportional";
    case 1: return "scripted";
    case 2: return "replay";
    default: return "live";
  }
}

}  // namespace wavesync
