#include "wavesync/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <exception>

#include <fmt/format.h>

#include "wavesync/error.hpp"
#include "wavesync/simulator.hpp"

namespace wavesync {

void SweepSpec::validate() const {
  const auto& names = sweep_axis_names();
  for (const auto& [name, values] : axes) {
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw Error(ErrorCode::kBadScenario, "field 'axes': unknown axis '" + name + "'");
    }
    if (values.empty()) throw Error(ErrorCode::kBadScenario, "field 'axes." + name + "': no values");
  }
  if (!force && run_count() > kMaxSweepRuns) {
    throw Error(ErrorCode::kSweepTooLarge,
                std::to_string(run_count()) + " runs exceeds " + std::to_string(kMaxSweepRuns) + " (use --force)");
  }
}

std::size_t SweepSpec::run_count() const {
  std::size_t n = 1;
  for (const auto& [name, values] : axes) n *= values.size();
  return n;
}

std::vector<SweepPoint> sweep_points(const SweepSpec& spec) {
  std::vector<std::pair<std::string, const std::vector<double>*>> axes;
  for (const std::string& name : sweep_axis_names()) {
    if (auto it = spec.axes.find(name); it != spec.axes.end()) axes.emplace_back(name, &it->second);
  }
  std::vector<SweepPoint> points;
  points.reserve(spec.run_count());
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    SweepPoint p;
    for (std::size_t k = 0; k < axes.size(); ++k) p.values[axes[k].first] = (*axes[k].second)[idx[k]];
    points.push_back(std::move(p));
    std::size_t k = axes.size();
    while (k > 0) {
      --k;
      if (++idx[k] < axes[k].second->size()) break;
      idx[k] = 0;
      if (k == 0) return points;
    }
    if (axes.empty()) return points;
  }
}

Scenario apply_point(const Scenario& base, const SweepPoint& point) {
  Scenario s = base;
  for (const auto& [name, value] : point.values) {
    if (name == "T") {
      s.delay = value;
      s.edge_delays.clear();
    } else if (name == "a") {
      std::fill(s.gains.a.begin(), s.gains.a.end(), value);
    } else if (name == "b") {
      std::fill(s.gains.b.begin(), s.gains.b.end(), value);
    } else if (name == "sigma") {
      s.gains.sigma = value;
    } else if (name == "K") {
      auto* p = std::get_if<ProportionalOperator>(&s.op);
      if (!p) throw Error(ErrorCode::kBadScenario, "field 'K': base operator is not proportional");
      p->gain = value;
    } else if (name == "dt") {
      s.dt = value;
    }
  }
  s.validate();
  return s;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const std::vector<SweepPoint> points = sweep_points(spec);
  std::vector<SweepRow> rows(points.size());
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    SweepRow& row = rows[static_cast<std::size_t>(k)];
    row.point = points[static_cast<std::size_t>(k)];
    try {
      const Scenario s = apply_point(spec.base, row.point);
      RunOptions options;
      options.record_edges = false;
      const auto start = std::chrono::steady_clock::now();
      const TrajectoryLog log = run(s, options);
      Metrics m = compute_metrics(log, s.q_r);
      m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      row.metrics = m;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  return rows;
}

std::vector<std::string> sweep_columns(const SweepSpec& spec) {
  std::vector<std::string> cols{"run"};
  for (const std::string& name : sweep_axis_names()) {
    if (spec.axes.count(name)) cols.push_back(name);
  }
  for (const char* c : {"arrival_time", "input_tv", "max_residual", "violations", "final_tracking_error",
                        "converged", "error"}) {
    cols.emplace_back(c);
  }
  return cols;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

}  // namespace

void write_sweep_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepRow>& rows) {
  const std::vector<std::string> cols = sweep_columns(spec);
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const SweepRow& row = rows[r];
    std::string line = fmt::format("{}", r);
    for (const std::string& name : sweep_axis_names()) {
      if (auto it = row.point.values.find(name); it != row.point.values.end()) line += fmt::format(",{}", it->second);
    }
    if (row.metrics) {
      const Metrics& m = *row.metrics;
      line += m.arrival_time ? fmt::format(",{}", *m.arrival_time) : std::string(",");
      line += fmt::format(",{},{},{},{},{},", m.input_total_variation, m.max_residual, m.violations,
                          m.final_tracking_error, m.arrival_time ? 1 : 0);
    } else {
      line += ",,,,,,0," + csv_field(row.error);
    }
    out << line << '\n';
  }
}

}  // namespace wavesync
