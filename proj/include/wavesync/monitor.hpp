#pragma once

#include <optional>
#include <span>

#include "wavesync/scenario.hpp"
#include "wavesync/trajectory.hpp"

namespace wavesync {

/// 1/2 |q - q_r|^2 + 1/2 |xi|^2.
double robot_storage(const Vec4& x_i, Vec2 q_r);

/// Trapezoidal value of 1/2 int |s+_ij - s_q|^2 + 1/2 int |s-_ji + s_q|^2 over
/// [t - T, t]. Each history holds equally spaced samples ending at t; the
/// spacing is T / (size - 1). Throws InsufficientHistory if the histories
/// differ in length or cannot span a nonzero window.
double channel_storage(std::span<const Vec4> plus_history, std::span<const Vec4> minus_history, Vec2 q_r,
                       double sigma, double delay);

/// Fills `total` and `energy` from the per-component storages.
void finalize_ledger(EnergyLedger& ledger, std::size_t accessible_count);

/// (S_total(t + dt) - S_total(t)) / dt - zbar' u_h.
double passivity_residual(const EnergyLedger& now, const EnergyLedger& next, Vec2 z_bar, Vec2 u_h, double dt);

/// Default violation threshold: coefficient * dt.
inline constexpr double kResidualCoefficient = 1.0;
inline double residual_tolerance(double dt) { return kResidualCoefficient * dt; }

inline constexpr double kArrivalRadius = 0.05;

struct Metrics {
  std::optional<double> arrival_time;
  double input_total_variation = 0.0;
  double max_sync_error = 0.0;      ///< max over time of max_ij |q_i - q_j|
  double final_tracking_error = 0.0;  ///< max_i |q_i - q_r| at the last record
  double final_z_error = 0.0;       ///< |z - q_r| at the last record
  double max_residual = 0.0;          ///< largest passivity residual (may be negative)
  std::size_t violations = 0;
  std::optional<double> final_edge_error;  ///< max_edge |e_ij| at the last record, if defined
  double wall_seconds = 0.0;
};

Metrics compute_metrics(const TrajectoryLog& log, Vec2 q_r);

/// Convergence diagnostics along each edge at `record`:
///   e_ij = -(1/sigma) [(r^q_ij - q_i) + (r^q_ji(t - T) - q_j(t - T))]
/// and symmetrically e_ji. Returns the largest norm over edges, or nothing if
/// the record is younger than the delay.
std::optional<double> max_edge_error(const TrajectoryLog& log, const Scenario& scenario, std::size_t record);

/// dt * (-zbar' u_h - epsilon |zbar|^2), left endpoint of the step.
double human_energy_increment(Vec2 z_bar, Vec2 u_h, double epsilon, double dt);

}  // namespace wavesync
