#include "wavesync/monitor.hpp"

#include <algorithm>
#include <cmath>

#include "wavesync/error.hpp"
#include "wavesync/scattering.hpp"

namespace wavesync {

double robot_storage(const Vec4& x_i, Vec2 q_r) {
  return 0.5 * squared_norm(x_i.head() - q_r) + 0.5 * squared_norm(x_i.tail());
}

double channel_storage(std::span<const Vec4> plus_history, std::span<const Vec4> minus_history, Vec2 q_r,
                       double sigma, double delay) {
  if (delay == 0.0) return 0.0;
  if (plus_history.size() != minus_history.size() || plus_history.size() < 2) {
    throw Error(ErrorCode::kInsufficientHistory, "channel window needs matching histories of at least two samples");
  }
  const Vec4 s_q = reference_wave(q_r, sigma);
  const std::size_t n = plus_history.size();
  const double h = delay / static_cast<double>(n - 1);
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = 0.5 * squared_norm(plus_history[k] - s_q) + 0.5 * squared_norm(minus_history[k] + s_q);
    sum += (k == 0 || k + 1 == n) ? 0.5 * f : f;
  }
  return h * sum;
}

void finalize_ledger(EnergyLedger& ledger, std::size_t accessible_count) {
  double sum = 0.0;
  for (double s : ledger.robot) sum += s;
  for (double s : ledger.channel) sum += s;
  ledger.total = sum / static_cast<double>(accessible_count);
  ledger.energy = ledger.total + ledger.human_integral;
}

double passivity_residual(const EnergyLedger& now, const EnergyLedger& next, Vec2 z_bar, Vec2 u_h, double dt) {
  return (next.total - now.total) / dt - dot(z_bar, u_h);
}

double human_energy_increment(Vec2 z_bar, Vec2 u_h, double epsilon, double dt) {
  return dt * (-dot(z_bar, u_h) - epsilon * squared_norm(z_bar));
}

namespace {

double tracking_error(const StepRecord& r, Vec2 q_r) {
  double worst = 0.0;
  for (const RobotState& s : r.states) worst = std::max(worst, norm(s.q - q_r));
  return worst;
}

double sync_error(const StepRecord& r) {
  double worst = 0.0;
  for (std::size_t i = 0; i < r.states.size(); ++i) {
    for (std::size_t j = i + 1; j < r.states.size(); ++j) worst = std::max(worst, norm(r.states[i].q - r.states[j].q));
  }
  return worst;
}

}  // namespace

Metrics compute_metrics(const TrajectoryLog& log, Vec2 q_r) {
  Metrics m;
  if (log.records.empty()) return m;

  std::size_t first_ok = log.records.size();
  for (std::size_t k = log.records.size(); k-- > 0;) {
    if (tracking_error(log.records[k], q_r) >= kArrivalRadius) break;
    first_ok = k;
  }
  if (first_ok < log.records.size()) m.arrival_time = log.records[first_ok].t;

  bool any_residual = false;
  for (std::size_t k = 0; k < log.records.size(); ++k) {
    const StepRecord& r = log.records[k];
    if (k + 1 < log.records.size()) m.input_total_variation += norm(log.records[k + 1].u_h - r.u_h);
    m.max_sync_error = std::max(m.max_sync_error, sync_error(r));
    if (std::isfinite(r.residual)) {
      m.max_residual = any_residual ? std::max(m.max_residual, r.residual) : r.residual;
      any_residual = true;
    }
  }
  const StepRecord& last = log.records.back();
  m.final_tracking_error = tracking_error(last, q_r);
  m.final_z_error = norm(last.z - q_r);
  m.violations = log.violations.size();
  return m;
}

std::optional<double> max_edge_error(const TrajectoryLog& log, const Scenario& scenario, std::size_t record) {
  if (record >= log.records.size()) return std::nullopt;
  const StepRecord& now = log.records[record];
  if (now.edges.size() != scenario.graph.edges().size()) return std::nullopt;
  const double inv_sigma = 1.0 / scenario.gains.sigma;
  double worst = 0.0;
  for (std::size_t e = 0; e < now.edges.size(); ++e) {
    const auto lag = scenario.mode == ChannelMode::kDelayFree
                         ? std::size_t{0}
                         : static_cast<std::size_t>(std::llround(scenario.edge_delay(e) / scenario.dt));
    if (record < lag) return std::nullopt;
    const StepRecord& past = log.records[record - lag];
    const Edge& edge = scenario.graph.edges()[e];
    const Vec2 e_ij = -inv_sigma * ((now.edges[e].r_ij.head() - now.states[edge.i].q) +
                                    (past.edges[e].r_ji.head() - past.states[edge.j].q));
    const Vec2 e_ji = -inv_sigma * ((now.edges[e].r_ji.head() - now.states[edge.j].q) +
                                    (past.edges[e].r_ij.head() - past.states[edge.i].q));
    worst = std::max({worst, norm(e_ij), norm(e_ji)});
  }
  return worst;
}

}  // namespace wavesync
