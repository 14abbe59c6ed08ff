// wavesync: batch runner, parameter sweeps, record replay and the live session server.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "wavesync/error.hpp"
#include "wavesync/scenario.hpp"
#include "wavesync/session_record.hpp"
#include "wavesync/session_server.hpp"
#include "wavesync/simulator.hpp"
#include "wavesync/sweep.hpp"
#include "wavesync/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace wavesync;

namespace {

constexpr int kExitClean = 0;
constexpr int kExitConfig = 1;
constexpr int kExitViolation = 2;

struct Globals {
  std::optional<double> dt;
  std::optional<double> duration;
  bool strict = false;
  std::string out = "out";
};

void apply_overrides(Scenario& s, const Globals& g) {
  if (g.dt) s.dt = *g.dt;
  if (g.duration) s.duration = *g.duration;
  s.validate();
}

fs::path out_dir(const Globals& g) {
  fs::path dir(g.out);
  fs::create_directories(dir);
  return dir;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kBadScenario, "cannot write " + path.string());
  return out;
}

void write_artifacts(const fs::path& dir, const Scenario& scenario, const TrajectoryLog& log, const Metrics& m,
                     bool edges) {
  {
    auto out = open_out(dir / "trajectory.csv");
    write_trajectory_csv(out, log);
  }
  if (edges) {
    auto out = open_out(dir / "edges.csv");
    write_edges_csv(out, log, scenario.graph);
  }
  {
    auto out = open_out(dir / "violations.csv");
    write_violations_csv(out, log);
  }
  nlohmann::json j = metrics_to_json(m);
  j["scenario"] = scenario.name;
  j["mode"] = std::string(to_string(scenario.mode));
  open_out(dir / "metrics.json") << j.dump(2) << '\n';
  open_out(dir / "metrics.txt") << metrics_text(m, scenario.name);
}

int cmd_run(const Globals& g, const std::string& path, bool edges, bool parallel) {
  Scenario s = load_scenario(path);
  apply_overrides(s, g);
  RunOptions options;
  options.policy = parallel ? ExecPolicy::kParallel : ExecPolicy::kSerial;
  const auto start = std::chrono::steady_clock::now();
  const TrajectoryLog log = run(s, options);
  Metrics m = summarize(log, s);
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const fs::path dir = out_dir(g);
  write_artifacts(dir, s, log, m, edges);
  std::cout << metrics_text(m, s.name) << fmt::format("  wall_seconds          {:.3f}\n", m.wall_seconds)
            << "artifacts in " << dir.string() << '\n';
  if (g.strict && m.violations > 0) {
    std::cerr << "strict: " << m.violations << " passivity violations\n";
    return kExitViolation;
  }
  return kExitClean;
}

/// "T=0,0.25,0.5" -> ("T", {0, 0.25, 0.5})
std::pair<std::string, std::vector<double>> parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw Error(ErrorCode::kBadScenario, "axis '" + text + "': expected NAME=v1,v2,...");
  }
  std::vector<double> values;
  std::stringstream ss(text.substr(eq + 1));
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kBadScenario, "axis '" + text + "': '" + item + "' is not a number");
    }
  }
  return {text.substr(0, eq), values};
}

int cmd_sweep(const Globals& g, const std::string& path, const std::vector<std::string>& axes, bool force) {
  SweepSpec spec;
  spec.base = load_scenario(path);
  apply_overrides(spec.base, g);
  spec.force = force;
  for (const std::string& a : axes) {
    auto [name, values] = parse_axis(a);
    spec.axes[name] = std::move(values);
  }
  spec.validate();
  std::cerr << "sweep: " << spec.run_count() << " runs\n";
  const std::vector<SweepRow> rows = run_sweep(spec);
  const fs::path dir = out_dir(g);
  {
    auto out = open_out(dir / "sweep.csv");
    write_sweep_csv(out, spec, rows);
  }
  write_sweep_csv(std::cout, spec, rows);
  std::size_t failed = 0;
  std::size_t violating = 0;
  for (const SweepRow& r : rows) {
    if (!r.metrics) ++failed;
    else if (r.metrics->violations > 0) ++violating;
  }
  if (failed) std::cerr << "sweep: " << failed << " runs failed (see the error column)\n";
  if (g.strict && violating > 0) {
    std::cerr << "strict: " << violating << " runs with passivity violations\n";
    return kExitViolation;
  }
  return kExitClean;
}

int cmd_replay(const Globals& g, const std::string& path) {
  if (g.dt || g.duration) std::cerr << "replay: --dt and --duration are ignored; the record fixes both\n";
  const SessionRecord record = load_record(path);
  const Scenario s = replay_scenario(record);
  const TrajectoryLog log = replay_record(record);
  const Metrics m = summarize(log, s);
  const fs::path dir = out_dir(g);
  write_artifacts(dir, s, log, m, false);
  std::cout << "replay matches the record (" << log.records.size() << " records)\n" << metrics_text(m, s.name);
  if (g.strict && m.violations > 0) return kExitViolation;
  return kExitClean;
}

int cmd_serve(const Globals& g, const std::string& path, int port, const std::string& view,
              const std::string& record, double feedback_rate, bool autostart) {
  SessionConfig cfg;
  cfg.scenario = load_scenario(path);
  apply_overrides(cfg.scenario, g);
  if (port < 0 || port > 65535) throw Error(ErrorCode::kBadScenario, "field 'port': out of range");
  cfg.port = static_cast<std::uint16_t>(port);
  cfg.view = view == "debug" ? ViewMode::kDebug : ViewMode::kOperator;
  cfg.feedback_rate = feedback_rate;
  cfg.autostart = autostart;
  cfg.handle_signals = true;
  if (!record.empty()) cfg.record_path = record;
  SessionServer server(std::move(cfg));
  std::cerr << "serving " << path << " on ws://127.0.0.1:" << server.port() << " (" << view << " view)\n";
  server.run();
  const SessionRecord rec = server.session().record();
  if (record.empty()) return kExitClean;
  std::cerr << "session record written to " << record << '\n';
  if (g.strict && !rec.trajectory.violations.empty()) return kExitViolation;
  return kExitClean;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative control of a delayed robot network over wave-variable channels"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--dt", g.dt, "Override the scenario time step [s]")->check(CLI::PositiveNumber);
  app.add_option("--duration", g.duration, "Override the simulated duration [s]")->check(CLI::NonNegativeNumber);
  app.add_flag("--strict", g.strict, "Exit 2 if any passivity violation is recorded");
  app.add_option("--out", g.out, "Artifact directory")->capture_default_str();

  std::string scenario_path;
  bool edges = false;
  bool parallel = false;
  auto* run = app.add_subcommand("run", "Run one scenario and write trajectory, metrics and violation report");
  run->add_option("scenario", scenario_path, "Scenario JSON")->required();
  run->add_flag("--edges", edges, "Also write per-edge channel quantities (edges.csv)");
  run->add_flag("--parallel", parallel, "Use the OpenMP kernels");

  std::vector<std::string> axes;
  bool force = false;
  auto* sweep = app.add_subcommand("sweep", "Run the Cartesian product of parameter axes");
  sweep->add_option("scenario", scenario_path, "Base scenario JSON")->required();
  sweep->add_option("--axis", axes, "NAME=v1,v2,... with NAME in T, a, b, sigma, K, dt (repeatable)");
  sweep->add_flag("--force", force, "Allow more than 10000 runs");

  std::string record_path;
  auto* replay = app.add_subcommand("replay", "Re-run a session record and check it bit for bit");
  replay->add_option("record", record_path, "Session record JSON")->required();

  int port = 8765;
  std::string view = "operator";
  std::string record_out;
  double feedback_rate = kDefaultFeedbackRate;
  bool autostart = false;
  auto* serve = app.add_subcommand("serve", "Host a live session over websocket");
  serve->add_option("--scenario", scenario_path, "Scenario JSON")->required();
  serve->add_option("--port", port, "TCP port (0 picks one)")->capture_default_str();
  serve->add_option("--view", view, "operator | debug")
      ->check(CLI::IsMember({"operator", "debug"}))
      ->capture_default_str();
  serve->add_option("--record", record_out, "Write the session record here on shutdown");
  serve->add_option("--feedback-rate", feedback_rate, "State frames per second")->capture_default_str();
  serve->add_flag("--autostart", autostart, "Start stepping without waiting for a start message");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitClean : kExitConfig;
  }

  try {
    if (*run) return cmd_run(g, scenario_path, edges, parallel);
    if (*sweep) return cmd_sweep(g, scenario_path, axes, force);
    if (*replay) return cmd_replay(g, record_path);
    if (*serve) return cmd_serve(g, scenario_path, port, view, record_out, feedback_rate, autostart);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::kReplayDivergence:
      case ErrorCode::kNumericBlowup:
      case ErrorCode::kPassivityViolation:
        return kExitViolation;
      default:
        return kExitConfig;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
