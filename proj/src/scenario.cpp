#include "wavesync/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "wavesync/error.hpp"

namespace wavesync {

using nlohmann::json;

std::string_view to_string(ChannelMode mode) {
  switch (mode) {
    case ChannelMode::kDelayFree: return "delay_free";
    case ChannelMode::kScattering: return "scattering";
    case ChannelMode::kRawDelay: return "raw_delay";
  }
  return "unknown";
}

std::int64_t Scenario::step_count() const { return static_cast<std::int64_t>(std::llround(duration / dt)); }

void Scenario::validate() const {
  auto bad = [](const std::string& field, const std::string& msg) {
    throw Error(ErrorCode::kBadScenario, "field '" + field + "': " + msg);
  };
  if (!(dt > 0.0) || !std::isfinite(dt)) bad("dt", "must be positive");
  if (!(duration >= 0.0) || !std::isfinite(duration)) bad("duration", "must be >= 0");
  if (std::fabs(duration / dt - std::round(duration / dt)) > 1e-6) bad("duration", "must be a multiple of dt");
  if (!(delay >= 0.0) || !std::isfinite(delay)) bad("delay", "must be >= 0");
  if (!edge_delays.empty() && edge_delays.size() != graph.edges().size()) bad("delays", "one per edge");
  if (mode != ChannelMode::kDelayFree) {
    for (std::size_t e = 0; e < graph.edges().size(); ++e) {
      const double T = edge_delay(e);
      if (!(T >= 0.0)) bad("delays", "must be >= 0");
      if (std::fabs(T / dt - std::round(T / dt)) >= 1e-9) bad("delay", "must be an integer multiple of dt");
    }
  }
  try {
    gains.validate(graph);
  } catch (const Error& e) {
    bad("gains", e.what());
  }
  if (initial.size() != graph.size()) bad("q0", "one state per agent required");
  for (const RobotState& s : initial) {
    if (!is_finite(s.q) || !is_finite(s.xi)) bad("q0", "non-finite initial state");
  }
  if (!is_finite(q_r)) bad("q_r", "non-finite");
  if (!biases.empty() && biases.size() != graph.size()) bad("biases", "one per agent required");
  if (const auto* p = std::get_if<ProportionalOperator>(&op)) {
    if (!(p->gain > 0.0)) bad("operator.K", "must be positive");
    if (!(p->u_max > 0.0)) bad("operator.u_max", "must be positive");
  }
}

Scenario reference_scenario(ChannelMode mode) {
  const std::vector<std::pair<AgentId, AgentId>> edges{{1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {1, 6}, {2, 5}};
  const std::vector<AgentId> accessible{3, 4};
  Scenario s;
  s.name = mode == ChannelMode::kDelayFree ? "reference_delay_free" : "reference_delayed";
  s.graph = build_graph_one_based(6, edges, accessible);
  s.gains = Gains::uniform(s.graph, 0.2, 0.05, 1.0);
  s.delay = mode == ChannelMode::kDelayFree ? 0.0 : 0.5;
  s.dt = 0.01;
  s.duration = 300.0;
  s.initial.assign(6, RobotState{{2.6, 1.6}, {0.0, 0.0}});
  s.q_r = {0.55, 0.60};
  s.biases = {{0.35, 0.175}, {0.0, 0.175}, {-0.35, 0.175}, {-0.35, -0.175}, {0.0, -0.175}, {0.35, -0.175}};
  s.op = ProportionalOperator{0.5, 1.0};
  s.mode = mode;
  return s;
}

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::kBadScenario, "field '" + field + "': " + msg);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) bad_field(path + key, "missing");
  return obj.at(key);
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) bad_field(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) bad_field(field, "must be finite");
  return d;
}

double number_or(const json& obj, const char* key, double fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  return number(obj.at(key), path + key);
}

Vec2 vec2(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 2) bad_field(field, "expected [x, y]");
  return {number(v[0], field + "[0]"), number(v[1], field + "[1]")};
}

std::size_t index(const json& v, const std::string& field) {
  if (!v.is_number_integer() || v.get<long long>() < 1) bad_field(field, "expected a 1-based agent index");
  return static_cast<std::size_t>(v.get<long long>());
}

std::vector<Vec2> per_agent(const json& v, std::size_t n, const std::string& field) {
  // Either one [x, y] applied to every agent or a list of n of them.
  if (v.is_array() && v.size() == 2 && v[0].is_number()) return std::vector<Vec2>(n, vec2(v, field));
  if (!v.is_array() || v.size() != n) bad_field(field, "expected [x, y] or one [x, y] per agent");
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(vec2(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<Vec2> replay_commands_from_record(const std::filesystem::path& path, double dt) {
  std::ifstream in(path);
  if (!in) bad_field("operator.record", "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const json doc = parse_json_text(buf.str(), path.string());
  if (!doc.contains("u_h") || !doc.at("u_h").is_array()) bad_field("operator.record", "record has no u_h array");
  if (doc.contains("scenario") && doc["scenario"].contains("dt")) {
    const double record_dt = number(doc["scenario"]["dt"], "operator.record.scenario.dt");
    if (std::fabs(record_dt - dt) > 1e-12) bad_field("operator.record", "record dt differs from scenario dt");
  }
  std::vector<Vec2> out;
  for (const json& u : doc.at("u_h")) out.push_back(vec2(u, "operator.record.u_h"));
  return out;
}

OperatorSpec parse_operator(const json& o, double dt, const std::filesystem::path& base_dir) {
  const std::string p = "operator.";
  const json& kind_v = require(o, "kind", p);
  if (!kind_v.is_string()) bad_field("operator.kind", "expected a string");
  const std::string kind = kind_v.get<std::string>();
  const double u_max = number_or(o, "u_max", kDefaultMaxSpeed, p);
  if (!(u_max > 0.0)) bad_field("operator.u_max", "must be positive");
  if (kind == "proportional") {
    const double K = number(require(o, "K", p), "operator.K");
    if (!(K > 0.0)) bad_field("operator.K", "must be positive");
    return ProportionalOperator{K, u_max};
  }
  if (kind == "scripted" || kind == "zero") {
    std::vector<ScriptSegment> segs;
    if (o.contains("segments")) {
      const json& arr = o.at("segments");
      if (!arr.is_array()) bad_field("operator.segments", "expected an array");
      for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string f = "operator.segments[" + std::to_string(k) + "].";
        segs.push_back({number(require(arr[k], "start", f), f + "start"), number(require(arr[k], "end", f), f + "end"),
                        vec2(require(arr[k], "u", f), f + "u")});
      }
    }
    try {
      return ScriptedOperator{Schedule(std::move(segs)), u_max};
    } catch (const Error& e) {
      bad_field("operator.segments", e.what());
    }
  }
  if (kind == "replay") {
    ReplayOperator r;
    if (o.contains("commands")) {
      for (const json& u : o.at("commands")) r.commands.push_back(vec2(u, "operator.commands"));
      r.source = "inline";
    } else {
      const json& rec = require(o, "record", p);
      if (!rec.is_string()) bad_field("operator.record", "expected a path");
      std::filesystem::path path = rec.get<std::string>();
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      r.commands = replay_commands_from_record(path, dt);
      r.source = path.string();
    }
    return r;
  }
  if (kind == "live") {
    const double hold = number_or(o, "hold_timeout", kDefaultHoldTimeout, p);
    if (!(hold >= 0.0)) bad_field("operator.hold_timeout", "must be >= 0");
    return LiveOperator{std::make_shared<LiveAdapter>(), hold, u_max};
  }
  bad_field("operator.kind", "unknown kind '" + kind + "'");
}

}  // namespace

json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::kBadScenario,
                origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
  }
}

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) bad_field("<root>", "expected an object");
  if (doc.contains("v") && (!doc["v"].is_number_integer() || doc["v"].get<int>() != 1)) {
    bad_field("v", "unsupported version");
  }
  Scenario s;
  s.name = doc.value("name", std::string("unnamed"));

  const json& agents = require(doc, "agents", "");
  if (!agents.is_number_integer() || agents.get<long long>() < 1) bad_field("agents", "expected a positive integer");
  const auto n = static_cast<std::size_t>(agents.get<long long>());

  std::vector<std::pair<AgentId, AgentId>> edges;
  const json& edges_v = require(doc, "edges", "");
  if (!edges_v.is_array()) bad_field("edges", "expected a list of [i, j] pairs");
  for (std::size_t k = 0; k < edges_v.size(); ++k) {
    const std::string f = "edges[" + std::to_string(k) + "]";
    if (!edges_v[k].is_array() || edges_v[k].size() != 2) bad_field(f, "expected [i, j]");
    edges.emplace_back(index(edges_v[k][0], f), index(edges_v[k][1], f));
  }
  std::vector<AgentId> accessible;
  const json& acc_v = require(doc, "accessible", "");
  if (!acc_v.is_array()) bad_field("accessible", "expected a list of agent indices");
  for (std::size_t k = 0; k < acc_v.size(); ++k) accessible.push_back(index(acc_v[k], "accessible"));
  try {
    s.graph = build_graph_one_based(n, edges, accessible);
  } catch (const Error& e) {
    bad_field("edges", e.what());
  }

  const json& g = require(doc, "gains", "");
  const double a = number(require(g, "a", "gains."), "gains.a");
  const double b = number(require(g, "b", "gains."), "gains.b");
  s.gains.sigma = number(require(g, "sigma", "gains."), "gains.sigma");
  s.gains.a.assign(s.graph.edges().size(), a);
  s.gains.b.assign(s.graph.edges().size(), b);
  if (g.contains("edges")) {
    for (const json& over : g.at("edges")) {
      const json& pair = require(over, "edge", "gains.edges[].");
      if (!pair.is_array() || pair.size() != 2) bad_field("gains.edges[].edge", "expected [i, j]");
      const std::size_t i = index(pair[0], "gains.edges[].edge") - 1;
      const std::size_t j = index(pair[1], "gains.edges[].edge") - 1;
      const std::size_t e = s.graph.find_edge(i, j);
      if (e == s.graph.edges().size()) bad_field("gains.edges[].edge", "not an edge of the graph");
      s.gains.a[e] = number_or(over, "a", a, "gains.edges[].");
      s.gains.b[e] = number_or(over, "b", b, "gains.edges[].");
    }
  }

  const std::string mode = doc.value("mode", std::string("scattering"));
  if (mode == "scattering") {
    s.mode = ChannelMode::kScattering;
  } else if (mode == "delay_free") {
    s.mode = ChannelMode::kDelayFree;
  } else if (mode == "raw_delay") {
    s.mode = ChannelMode::kRawDelay;
  } else {
    bad_field("mode", "expected scattering, delay_free or raw_delay");
  }
  s.delay = number_or(doc, "delay", 0.0, "");
  if (doc.contains("delays")) {
    s.edge_delays.assign(s.graph.edges().size(), s.delay);
    for (const json& over : doc.at("delays")) {
      const json& pair = require(over, "edge", "delays[].");
      if (!pair.is_array() || pair.size() != 2) bad_field("delays[].edge", "expected [i, j]");
      const std::size_t e = s.graph.find_edge(index(pair[0], "delays[].edge") - 1, index(pair[1], "delays[].edge") - 1);
      if (e == s.graph.edges().size()) bad_field("delays[].edge", "not an edge of the graph");
      s.edge_delays[e] = number(require(over, "T", "delays[]."), "delays[].T");
    }
  }
  s.dt = number(require(doc, "dt", ""), "dt");
  s.duration = number(require(doc, "duration", ""), "duration");

  const std::vector<Vec2> q0 = per_agent(require(doc, "q0", ""), n, "q0");
  const std::vector<Vec2> xi0 = doc.contains("xi0") ? per_agent(doc.at("xi0"), n, "xi0") : std::vector<Vec2>(n);
  for (std::size_t i = 0; i < n; ++i) s.initial.push_back({q0[i], xi0[i]});
  s.q_r = vec2(require(doc, "q_r", ""), "q_r");
  if (doc.contains("biases")) s.biases = per_agent(doc.at("biases"), n, "biases");
  if (doc.contains("obstacles")) {
    for (const json& ob : doc.at("obstacles")) {
      s.obstacles.push_back({vec2(require(ob, "center", "obstacles[]."), "obstacles[].center"),
                             number(require(ob, "radius", "obstacles[]."), "obstacles[].radius")});
    }
  }
  if (!(s.dt > 0.0)) bad_field("dt", "must be positive");
  s.op = parse_operator(require(doc, "operator", ""), s.dt, base_dir);
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kBadScenario, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(parse_json_text(buf.str(), path.string()), path.parent_path());
}

json scenario_to_json(const Scenario& s) {
  auto v2 = [](Vec2 v) { return json::array({v.x, v.y}); };
  json doc;
  doc["v"] = 1;
  doc["name"] = s.name;
  doc["agents"] = s.graph.size();
  json edges = json::array();
  for (const Edge& e : s.graph.edges()) edges.push_back(json::array({e.i + 1, e.j + 1}));
  doc["edges"] = edges;
  json acc = json::array();
  for (AgentId i : s.graph.accessible()) acc.push_back(i + 1);
  doc["accessible"] = acc;

  json gains{{"a", s.gains.a.empty() ? 0.0 : s.gains.a.front()},
             {"b", s.gains.b.empty() ? 0.0 : s.gains.b.front()},
             {"sigma", s.gains.sigma}};
  json over = json::array();
  for (std::size_t e = 0; e < s.gains.a.size(); ++e) {
    if (s.gains.a[e] != s.gains.a.front() || s.gains.b[e] != s.gains.b.front()) {
      const Edge& edge = s.graph.edges()[e];
      over.push_back({{"edge", {edge.i + 1, edge.j + 1}}, {"a", s.gains.a[e]}, {"b", s.gains.b[e]}});
    }
  }
  if (!over.empty()) gains["edges"] = over;
  doc["gains"] = gains;
  doc["mode"] = std::string(to_string(s.mode));
  doc["delay"] = s.delay;
  if (!s.edge_delays.empty()) {
    json delays = json::array();
    for (std::size_t e = 0; e < s.edge_delays.size(); ++e) {
      const Edge& edge = s.graph.edges()[e];
      delays.push_back({{"edge", {edge.i + 1, edge.j + 1}}, {"T", s.edge_delays[e]}});
    }
    doc["delays"] = delays;
  }
  doc["dt"] = s.dt;
  doc["duration"] = s.duration;
  json q0 = json::array();
  json xi0 = json::array();
  for (const RobotState& r : s.initial) {
    q0.push_back(v2(r.q));
    xi0.push_back(v2(r.xi));
  }
  doc["q0"] = q0;
  doc["xi0"] = xi0;
  doc["q_r"] = v2(s.q_r);
  if (!s.biases.empty()) {
    json b = json::array();
    for (Vec2 d : s.biases) b.push_back(v2(d));
    doc["biases"] = b;
  }
  json obstacles = json::array();
  for (const Obstacle& o : s.obstacles) obstacles.push_back({{"center", v2(o.center)}, {"radius", o.radius}});
  doc["obstacles"] = obstacles;

  json op;
  op["kind"] = std::string(operator_kind(s.op));
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, ProportionalOperator>) {
          op["K"] = o.gain;
          op["u_max"] = o.u_max;
        } else if constexpr (std::is_same_v<T, ScriptedOperator>) {
          json segs = json::array();
          for (const ScriptSegment& seg : o.schedule.segments()) {
            segs.push_back({{"start", seg.start}, {"end", seg.end}, {"u", v2(seg.u)}});
          }
          op["segments"] = segs;
          op["u_max"] = o.u_max;
        } else if constexpr (std::is_same_v<T, ReplayOperator>) {
          json cmds = json::array();
          for (Vec2 u : o.commands) cmds.push_back(v2(u));
          op["commands"] = cmds;
        } else {
          op["hold_timeout"] = o.hold_timeout;
          op["u_max"] = o.u_max;
        }
      },
      s.op);
  doc["operator"] = op;
  return doc;
}

}  // namespace wavesync
