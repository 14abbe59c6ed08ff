#include "wavesync/session_record.hpp"

#include <fstream>
#include <sstream>

#include "wavesync/error.hpp"
#include "wavesync/simulator.hpp"
#include "wavesync/trajectory_io.hpp"

namespace wavesync {

using nlohmann::json;

namespace {

json v2(Vec2 v) { return json::array({v.x, v.y}); }

[[noreturn]] void truncated(const std::string& what) {
  throw Error(ErrorCode::kBadScenario, "session record: " + what);
}

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) truncated(std::string("missing '") + key + "'");
  return obj.at(key);
}

Vec2 to_vec2(const json& v, const char* what) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    truncated(std::string("malformed ") + what);
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

const json& array_of(const json& obj, const char* key, std::size_t size) {
  const json& a = field(obj, key);
  if (!a.is_array() || a.size() != size) truncated(std::string("'") + key + "' has the wrong length");
  return a;
}

}  // namespace

SessionRecord make_record(const Scenario& scenario, const TrajectoryLog& log, std::vector<CommandSample> commands) {
  SessionRecord rec;
  rec.scenario = scenario_to_json(scenario);
  rec.commands = std::move(commands);
  rec.trajectory.dt = log.dt;
  rec.trajectory.q_r = log.q_r;
  rec.trajectory.residual_tolerance = log.residual_tolerance;
  rec.trajectory.records.reserve(log.records.size());
  for (const StepRecord& r : log.records) {
    rec.u_h.push_back(r.u_h);
    StepRecord lean;
    lean.step = r.step;
    lean.t = r.t;
    lean.states = r.states;
    lean.z = r.z;
    lean.u_h = r.u_h;
    rec.trajectory.records.push_back(std::move(lean));
  }
  rec.trajectory.violations = log.violations;
  rec.metrics = metrics_to_json(summarize(log, scenario));
  return rec;
}

json record_to_json(const SessionRecord& record) {
  json doc;
  doc["v"] = 1;
  doc["type"] = "session_record";
  doc["scenario"] = record.scenario;
  json u = json::array();
  for (Vec2 v : record.u_h) u.push_back(v2(v));
  doc["u_h"] = std::move(u);
  json cmds = json::array();
  for (const CommandSample& c : record.commands) cmds.push_back({{"t", c.t}, {"u", v2(c.u)}});
  doc["commands"] = std::move(cmds);

  json step = json::array(), t = json::array(), z = json::array(), q = json::array(), xi = json::array();
  for (const StepRecord& r : record.trajectory.records) {
    step.push_back(r.step);
    t.push_back(r.t);
    z.push_back(v2(r.z));
    json qs = json::array(), xs = json::array();
    for (const RobotState& s : r.states) {
      qs.push_back(v2(s.q));
      xs.push_back(v2(s.xi));
    }
    q.push_back(std::move(qs));
    xi.push_back(std::move(xs));
  }
  doc["trajectory"] = {{"step", step}, {"t", t}, {"z", z}, {"q", q}, {"xi", xi}};
  doc["metrics"] = record.metrics;
  return doc;
}

SessionRecord record_from_json(const json& doc) {
  if (!doc.is_object()) truncated("not a JSON object");
  if (field(doc, "v") != 1) truncated("unsupported version");
  if (field(doc, "type") != "session_record") truncated("not a session record");

  SessionRecord rec;
  rec.scenario = field(doc, "scenario");
  const Scenario scenario = parse_scenario(rec.scenario);

  const json& u = field(doc, "u_h");
  if (!u.is_array()) truncated("'u_h' is not an array");
  for (const json& v : u) rec.u_h.push_back(to_vec2(v, "u_h sample"));
  for (const json& c : field(doc, "commands")) {
    CommandSample s;
    s.t = field(c, "t").get<double>();
    s.u = to_vec2(field(c, "u"), "command");
    rec.commands.push_back(s);
  }

  const json& traj = field(doc, "trajectory");
  const std::size_t n = rec.u_h.size();
  const json& step = array_of(traj, "step", n);
  const json& t = array_of(traj, "t", n);
  const json& z = array_of(traj, "z", n);
  const json& q = array_of(traj, "q", n);
  const json& xi = array_of(traj, "xi", n);
  rec.trajectory.dt = scenario.dt;
  rec.trajectory.q_r = scenario.q_r;
  rec.trajectory.records.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    StepRecord& r = rec.trajectory.records[k];
    r.step = step[k].get<std::int64_t>();
    r.t = t[k].get<double>();
    r.z = to_vec2(z[k], "z");
    r.u_h = rec.u_h[k];
    if (!q[k].is_array() || !xi[k].is_array() || q[k].size() != scenario.graph.size() ||
        xi[k].size() != scenario.graph.size()) {
      truncated("state row has the wrong agent count");
    }
    for (std::size_t i = 0; i < q[k].size(); ++i) {
      r.states.push_back({to_vec2(q[k][i], "q"), to_vec2(xi[k][i], "xi")});
    }
  }
  rec.metrics = doc.value("metrics", json::object());
  return rec;
}

void save_record(const SessionRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kBadScenario, "cannot write " + path.string());
  out << record_to_json(record).dump() << '\n';
}

SessionRecord load_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kBadScenario, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return record_from_json(parse_json_text(buf.str(), path.string()));
}

Scenario replay_scenario(const SessionRecord& record) {
  Scenario s = parse_scenario(record.scenario);
  s.op = ReplayOperator{record.u_h, "session record"};
  const auto& recs = record.trajectory.records;
  s.duration = recs.empty() ? 0.0 : static_cast<double>(recs.back().step - recs.front().step) * s.dt;
  return s;
}

TrajectoryLog replay_record(const SessionRecord& record) {
  const Scenario scenario = replay_scenario(record);
  TrajectoryLog log = run(scenario);
  if (const auto k = first_divergence(record.trajectory, log)) {
    const double t = *k < log.records.size() ? log.records[*k].t : log.records.back().t;
    throw Error(ErrorCode::kReplayDivergence,
                "replay differs from the record at record " + std::to_string(*k) + " (t = " + std::to_string(t) + ")");
  }
  return log;
}

}  // namespace wavesync
