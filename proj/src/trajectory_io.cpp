#include "wavesync/trajectory_io.hpp"

#include <fmt/format.h>

#include <iterator>

namespace wavesync {

std::vector<std::string> trajectory_columns(std::size_t agents) {
  std::vector<std::string> cols{"step", "t", "z_x", "z_y", "u_x", "u_y"};
  for (std::size_t i = 1; i <= agents; ++i) {
    cols.push_back(fmt::format("q{}_x", i));
    cols.push_back(fmt::format("q{}_y", i));
    cols.push_back(fmt::format("xi{}_x", i));
    cols.push_back(fmt::format("xi{}_y", i));
  }
  for (const char* c : {"S_total", "S_robots", "S_channels", "U", "residual"}) cols.emplace_back(c);
  return cols;
}

std::vector<std::string> edge_columns() {
  std::vector<std::string> cols{"step", "t", "i", "j"};
  for (const char* group : {"r_ij", "p_ij", "r_ji", "p_ji", "s_plus", "s_minus"}) {
    for (int k = 0; k < 4; ++k) cols.push_back(fmt::format("{}_{}", group, k));
  }
  return cols;
}

namespace {

void write_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t k = 0; k < cols.size(); ++k) out << (k ? "," : "") << cols[k];
  out << '\n';
}

void append_vec4(fmt::memory_buffer& buf, const Vec4& v) {
  for (double c : v.v) fmt::format_to(std::back_inserter(buf), ",{}", c);
}

}  // namespace

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log) {
  const std::size_t n = log.records.empty() ? 0 : log.records.front().states.size();
  write_header(out, trajectory_columns(n));
  fmt::memory_buffer buf;
  for (const StepRecord& r : log.records) {
    buf.clear();
    auto it = std::back_inserter(buf);
    fmt::format_to(it, "{},{},{},{},{},{}", r.step, r.t, r.z.x, r.z.y, r.u_h.x, r.u_h.y);
    for (const RobotState& s : r.states) fmt::format_to(it, ",{},{},{},{}", s.q.x, s.q.y, s.xi.x, s.xi.y);
    double robots = 0.0;
    double channels = 0.0;
    for (double v : r.ledger.robot) robots += v;
    for (double v : r.ledger.channel) channels += v;
    fmt::format_to(it, ",{},{},{},{},", r.ledger.total, robots, channels, r.ledger.energy);
    if (std::isfinite(r.residual)) fmt::format_to(it, "{}", r.residual);
    buf.push_back('\n');
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
}

void write_edges_csv(std::ostream& out, const TrajectoryLog& log, const Graph& graph) {
  write_header(out, edge_columns());
  fmt::memory_buffer buf;
  for (const StepRecord& r : log.records) {
    for (std::size_t e = 0; e < r.edges.size(); ++e) {
      buf.clear();
      const Edge& edge = graph.edges()[e];
      fmt::format_to(std::back_inserter(buf), "{},{},{},{}", r.step, r.t, edge.i + 1, edge.j + 1);
      const EdgeSnapshot& s = r.edges[e];
      for (const Vec4* v : {&s.r_ij, &s.p_ij, &s.r_ji, &s.p_ji, &s.s_plus, &s.s_minus}) append_vec4(buf, *v);
      buf.push_back('\n');
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
  }
}

void write_violations_csv(std::ostream& out, const TrajectoryLog& log) {
  write_header(out, {"step", "t", "residual", "tolerance"});
  for (const PassivityViolation& v : log.violations) {
    out << fmt::format("{},{},{},{}\n", v.step, v.t, v.residual, v.tolerance);
  }
}

nlohmann::json metrics_to_json(const Metrics& m) {
  nlohmann::json j;
  j["arrival_time"] = m.arrival_time ? nlohmann::json(*m.arrival_time) : nlohmann::json(nullptr);
  j["converged"] = m.arrival_time.has_value();
  j["input_total_variation"] = m.input_total_variation;
  j["max_sync_error"] = m.max_sync_error;
  j["final_tracking_error"] = m.final_tracking_error;
  j["final_z_error"] = m.final_z_error;
  j["final_edge_error"] = m.final_edge_error ? nlohmann::json(*m.final_edge_error) : nlohmann::json(nullptr);
  j["max_residual"] = m.max_residual;
  j["violations"] = m.violations;
  j["wall_seconds"] = m.wall_seconds;
  return j;
}

std::string metrics_text(const Metrics& m, const std::string& title) {
  std::string s = fmt::format("{}\n", title);
  s += m.arrival_time ? fmt::format("  arrival_time          {:.2f} s\n", *m.arrival_time)
                      : std::string("  arrival_time          not reached\n");
  s += fmt::format("  input_total_variation {:.6g}\n", m.input_total_variation);
  s += fmt::format("  max_sync_error        {:.6g} m\n", m.max_sync_error);
  s += fmt::format("  final_tracking_error  {:.6g} m\n", m.final_tracking_error);
  s += fmt::format("  final_z_error         {:.6g} m\n", m.final_z_error);
  if (m.final_edge_error) s += fmt::format("  final_edge_error      {:.6g}\n", *m.final_edge_error);
  s += fmt::format("  max_residual          {:.6g}\n", m.max_residual);
  s += fmt::format("  passivity_violations  {}\n", m.violations);
  return s;
}

}  // namespace wavesync
