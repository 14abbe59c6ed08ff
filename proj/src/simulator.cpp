#include "wavesync/simulator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <exception>
#include <mutex>
#include <string>

#include "wavesync/error.hpp"
#include "wavesync/scattering.hpp"

namespace wavesync {

namespace {

/// Runs fn(k) for k in [0, n); OpenMP-parallel under kParallel. The first
/// exception thrown by any iteration is rethrown on the calling thread.
template <typename Fn>
void for_each_index(ExecPolicy policy, std::size_t n, Fn&& fn) {
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::kParallel)
  for (std::int64_t k = 0; k < count; ++k) {
    try {
      fn(static_cast<std::size_t>(k));
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

std::size_t lag_ticks(const Scenario& scenario, std::size_t edge) {
  return static_cast<std::size_t>(std::llround(scenario.edge_delay(edge) / scenario.dt));
}

std::vector<ChannelState> empty_channels(const Scenario& scenario) {
  std::vector<ChannelState> channels;
  if (scenario.mode == ChannelMode::kDelayFree) return channels;
  channels.reserve(scenario.graph.edges().size());
  for (std::size_t e = 0; e < scenario.graph.edges().size(); ++e) {
    const double T = scenario.edge_delay(e);
    channels.push_back({DelayLine(T, scenario.dt), DelayLine(T, scenario.dt)});
  }
  return channels;
}

}  // namespace

WorldState initial_world(const Scenario& scenario) {
  WorldState w;
  w.states = scenario.initial;
  w.channels = empty_channels(scenario);
  if (scenario.mode == ChannelMode::kRawDelay) {
    // Constant pre-history: neighbors appear at their initial states.
    for (std::size_t e = 0; e < w.channels.size(); ++e) {
      const Edge& edge = scenario.graph.edges()[e];
      const std::size_t span = std::max<std::size_t>(lag_ticks(scenario, e), 1);
      const auto first = -static_cast<std::int64_t>(span);
      w.channels[e].forward.prefill(w.states[edge.i].stacked(), first, span);
      w.channels[e].backward.prefill(w.states[edge.j].stacked(), first, span);
    }
  }
  return w;
}

WorldState equilibrium_world(const Scenario& scenario, const RobotState& consensus) {
  WorldState w;
  w.states.assign(scenario.graph.size(), consensus);
  w.channels = empty_channels(scenario);
  const Vec4 x = consensus.stacked();
  const double k = std::sqrt(scenario.gains.sigma / 2.0);
  for (std::size_t e = 0; e < w.channels.size(); ++e) {
    const std::size_t span = std::max<std::size_t>(lag_ticks(scenario, e), 1);
    const auto first = -static_cast<std::int64_t>(span);
    if (scenario.mode == ChannelMode::kScattering) {
      w.channels[e].forward.prefill(k * x, first, span);
      w.channels[e].backward.prefill(-k * x, first, span);
    } else {
      w.channels[e].forward.prefill(x, first, span);
      w.channels[e].backward.prefill(x, first, span);
    }
  }
  return w;
}

namespace kernels {

void resolve_edges(ExecPolicy policy, const Scenario& scenario, const WorldState& world,
                   std::span<EdgeSnapshot> out) {
  const auto edges = scenario.graph.edges();
  const double sigma = scenario.gains.sigma;
  for_each_index(policy, edges.size(), [&](std::size_t e) {
    const Vec4 x_i = world.states[edges[e].i].stacked();
    const Vec4 x_j = world.states[edges[e].j].stacked();
    const CouplingMatrix m = scenario.gains.coupling(e);
    EdgeSnapshot& snap = out[e];
    switch (scenario.mode) {
      case ChannelMode::kScattering: {
        const ChannelState& ch = world.channels[e];
        const EndpointSolution side_i = solve_endpoint_i(ch.backward.read_tick(world.step), x_i, m, sigma);
        const EndpointSolution side_j = solve_endpoint_j(ch.forward.read_tick(world.step), x_j, m, sigma);
        snap = {side_i.r, side_i.p, side_j.r, side_j.p, side_i.s_out, side_j.s_out};
        break;
      }
      case ChannelMode::kRawDelay: {
        const ChannelState& ch = world.channels[e];
        const Vec4 r_ij = ch.backward.read_tick(world.step);
        const Vec4 r_ji = ch.forward.read_tick(world.step);
        snap = {r_ij, coupling_output(x_i, r_ij, m), r_ji, coupling_output(x_j, r_ji, m), Vec4{}, Vec4{}};
        break;
      }
      case ChannelMode::kDelayFree:
        snap = {x_j, coupling_output(x_i, x_j, m), x_i, coupling_output(x_j, x_i, m), Vec4{}, Vec4{}};
        break;
    }
  });
}

void accumulate_agents(ExecPolicy policy, const Scenario& scenario, const WorldState& world,
                       std::span<const EdgeSnapshot> edges, Vec2 u_h, std::span<ControlOutput> out) {
  const Graph& graph = scenario.graph;
  if (scenario.mode == ChannelMode::kDelayFree) {
    for_each_index(policy, graph.size(), [&](std::size_t i) {
      out[i] = delay_free_agent(i, world.states, graph, scenario.gains, u_h);
    });
    return;
  }
  for_each_index(policy, graph.size(), [&](std::size_t i) {
    Vec4 mu;
    for (const Incidence& inc : graph.neighbors(i)) {
      mu += inc.side == EdgeSide::kI ? edges[inc.edge].p_ij : edges[inc.edge].p_ji;
    }
    out[i] = from_mu(mu, graph.is_accessible(i), u_h);
  });
}

void integrate(ExecPolicy policy, std::span<RobotState> states, std::span<const ControlOutput> derivatives,
               double dt, double t) {
  for_each_index(policy, states.size(), [&](std::size_t i) {
    RobotState& s = states[i];
    s.q += dt * derivatives[i].q_dot;
    s.xi += dt * derivatives[i].xi_dot;
    const double worst = max_abs(s.stacked());
    if (!(worst <= kBlowupLimit)) {
      throw Error(ErrorCode::kNumericBlowup,
                  "agent " + std::to_string(i + 1) + " state magnitude " + std::to_string(worst) + " at t=" +
                      std::to_string(t));
    }
  });
}

void push_channels(ExecPolicy policy, const Scenario& scenario, WorldState& world,
                   std::span<const EdgeSnapshot> edges) {
  if (scenario.mode == ChannelMode::kDelayFree) return;
  const auto graph_edges = scenario.graph.edges();
  for_each_index(policy, world.channels.size(), [&](std::size_t e) {
    ChannelState& ch = world.channels[e];
    if (scenario.mode == ChannelMode::kScattering) {
      ch.forward.push_tick(edges[e].s_plus, world.step);
      ch.backward.push_tick(edges[e].s_minus, world.step);
    } else {
      ch.forward.push_tick(world.states[graph_edges[e].i].stacked(), world.step);
      ch.backward.push_tick(world.states[graph_edges[e].j].stacked(), world.step);
    }
  });
}

}  // namespace kernels

Evaluation evaluate(const WorldState& world, const Scenario& scenario, Vec2 u_h, ExecPolicy policy) {
  if (!is_finite(u_h)) throw Error(ErrorCode::kNonFinite, "operator command is not finite");
  Evaluation eval;
  eval.u_h = u_h;
  eval.edges.resize(scenario.graph.edges().size());
  eval.outputs.resize(scenario.graph.size());
  kernels::resolve_edges(policy, scenario, world, eval.edges);
  kernels::accumulate_agents(policy, scenario, world, eval.edges, u_h, eval.outputs);
  return eval;
}

void advance(WorldState& world, const Scenario& scenario, const Evaluation& eval, ExecPolicy policy) {
  // Raw-delay lines carry the pre-step states, so push before integrating.
  kernels::push_channels(policy, scenario, world, eval.edges);
  kernels::integrate(policy, world.states, eval.outputs, scenario.dt, world.t);
  ++world.step;
  world.t = static_cast<double>(world.step) * scenario.dt;
}

WorldState step(WorldState world, const Scenario& scenario, Vec2 u_h, ExecPolicy policy) {
  const Evaluation eval = evaluate(world, scenario, u_h, policy);
  advance(world, scenario, eval, policy);
  return world;
}

WorldState reference_step(WorldState world, const Scenario& scenario, Vec2 u_h) {
  const Graph& graph = scenario.graph;
  const double sigma = scenario.gains.sigma;
  std::vector<ControlOutput> outputs(graph.size());
  // Outgoing samples indexed [edge][0 = forward, 1 = backward].
  std::vector<std::array<Vec4, 2>> outgoing(graph.edges().size());

  if (scenario.mode == ChannelMode::kDelayFree) {
    outputs = delay_free_derivatives(world.states, graph, scenario.gains, u_h);
  } else {
    for (AgentId i = 0; i < graph.size(); ++i) {
      const Vec4 x_i = world.states[i].stacked();
      std::vector<Vec4> refs;
      std::vector<CouplingMatrix> couplings;
      for (const Incidence& inc : graph.neighbors(i)) {
        const ChannelState& ch = world.channels[inc.edge];
        const CouplingMatrix m = scenario.gains.coupling(inc.edge);
        const bool lower = inc.side == EdgeSide::kI;
        const DelayLine& incoming = lower ? ch.backward : ch.forward;
        const Vec4 received = incoming.read_tick(world.step);
        if (scenario.mode == ChannelMode::kScattering) {
          const EndpointSolution sol =
              lower ? solve_endpoint_i(received, x_i, m, sigma) : solve_endpoint_j(received, x_i, m, sigma);
          refs.push_back(sol.r);
          outgoing[inc.edge][lower ? 0 : 1] = sol.s_out;
        } else {
          refs.push_back(received);
          outgoing[inc.edge][lower ? 0 : 1] = x_i;
        }
        couplings.push_back(m);
      }
      outputs[i] = delayed_derivatives(x_i, refs, couplings, graph.is_accessible(i), u_h);
    }
  }

  for (AgentId i = 0; i < graph.size(); ++i) {
    world.states[i].q += scenario.dt * outputs[i].q_dot;
    world.states[i].xi += scenario.dt * outputs[i].xi_dot;
    if (!(max_abs(world.states[i].stacked()) <= kBlowupLimit)) {
      throw Error(ErrorCode::kNumericBlowup, "agent " + std::to_string(i + 1) + " at t=" + std::to_string(world.t));
    }
  }
  for (std::size_t e = 0; e < world.channels.size(); ++e) {
    world.channels[e].forward.push_tick(outgoing[e][0], world.step);
    world.channels[e].backward.push_tick(outgoing[e][1], world.step);
  }
  ++world.step;
  world.t = static_cast<double>(world.step) * scenario.dt;
  return world;
}

EnergyLedger measure_ledger(const WorldState& world, const Scenario& scenario, const Evaluation& eval,
                            double human_integral) {
  EnergyLedger ledger;
  ledger.robot.reserve(world.states.size());
  for (const RobotState& s : world.states) ledger.robot.push_back(robot_storage(s.stacked(), scenario.q_r));
  ledger.channel.assign(scenario.graph.edges().size(), 0.0);
  if (scenario.mode == ChannelMode::kScattering) {
    for (std::size_t e = 0; e < world.channels.size(); ++e) {
      const double T = scenario.edge_delay(e);
      if (T == 0.0) continue;
      std::vector<Vec4> plus = world.channels[e].forward.window_before(world.step);
      std::vector<Vec4> minus = world.channels[e].backward.window_before(world.step);
      plus.push_back(eval.edges[e].s_plus);
      minus.push_back(eval.edges[e].s_minus);
      ledger.channel[e] = channel_storage(plus, minus, scenario.q_r, scenario.gains.sigma, T);
    }
  }
  ledger.human_integral = human_integral;
  finalize_ledger(ledger, scenario.graph.accessible_count());
  return ledger;
}

Stepper::Stepper(Scenario scenario, RunOptions options)
    : scenario_(std::move(scenario)), options_(std::move(options)) {
  scenario_.validate();
  world_ = options_.start ? *options_.start : initial_world(scenario_);
  options_.start.reset();
  log_.dt = scenario_.dt;
  log_.q_r = scenario_.q_r;
  log_.residual_tolerance =
      options_.residual_tolerance > 0.0 ? options_.residual_tolerance : residual_tolerance(scenario_.dt);
  epsilon_ = passivity_margin(scenario_.op);
  last_step_ = world_.step + scenario_.step_count();
  log_.records.reserve(static_cast<std::size_t>(scenario_.step_count()) + 1);
}

const StepRecord& Stepper::tick(std::optional<Vec2> u_override) {
  if (finished_) throw std::logic_error("Stepper::tick after the last step");
  const Vec2 z = average_accessible(world_.states, scenario_.graph);
  const Vec2 u_h = u_override ? *u_override
                              : operator_command(scenario_.op, {world_.step, world_.t, scenario_.q_r, z});
  const Evaluation eval = evaluate(world_, scenario_, u_h, options_.policy);

  StepRecord rec;
  rec.step = world_.step;
  rec.t = world_.t;
  rec.states = world_.states;
  rec.z = z;
  rec.u_h = u_h;
  rec.ledger = measure_ledger(world_, scenario_, eval, human_integral_);
  if (options_.record_edges) rec.edges = eval.edges;

  if (!log_.records.empty()) {
    StepRecord& prev = log_.records.back();
    prev.residual = passivity_residual(prev.ledger, rec.ledger, prev.z - scenario_.q_r, prev.u_h, scenario_.dt);
    if (prev.residual > log_.residual_tolerance) {
      log_.violations.push_back({prev.step, prev.t, prev.residual, log_.residual_tolerance});
      if (options_.fail_fast) {
        throw Error(ErrorCode::kPassivityViolation,
                    "residual " + std::to_string(prev.residual) + " at t=" + std::to_string(prev.t));
      }
    }
  }
  log_.records.push_back(std::move(rec));

  if (world_.step >= last_step_) {
    finished_ = true;
  } else {
    human_integral_ += human_energy_increment(z - scenario_.q_r, u_h, epsilon_, scenario_.dt);
    advance(world_, scenario_, eval, options_.policy);
  }
  return log_.records.back();
}

TrajectoryLog run(const Scenario& scenario, const RunOptions& options) {
  Stepper stepper(scenario, options);
  while (!stepper.finished()) stepper.tick();
  return stepper.take_log();
}

Metrics summarize(const TrajectoryLog& log, const Scenario& scenario) {
  Metrics m = compute_metrics(log, scenario.q_r);
  if (!log.records.empty()) m.final_edge_error = max_edge_error(log, scenario, log.records.size() - 1);
  return m;
}

Scenario with_replayed_commands(Scenario scenario, const TrajectoryLog& log) {
  ReplayOperator replay;
  replay.commands.reserve(log.records.size());
  for (const StepRecord& r : log.records) replay.commands.push_back(r.u_h);
  replay.source = "log";
  scenario.op = std::move(replay);
  return scenario;
}

namespace {

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }
bool same_bits(const Vec2& a, const Vec2& b) { return same_bits(a.x, b.x) && same_bits(a.y, b.y); }

}  // namespace

std::optional<std::size_t> first_divergence(const TrajectoryLog& a, const TrajectoryLog& b) {
  const std::size_t n = std::min(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < n; ++k) {
    const StepRecord& ra = a.records[k];
    const StepRecord& rb = b.records[k];
    bool same = ra.step == rb.step && same_bits(ra.t, rb.t) && same_bits(ra.u_h, rb.u_h) &&
                ra.states.size() == rb.states.size();
    for (std::size_t i = 0; same && i < ra.states.size(); ++i) {
      same = same_bits(ra.states[i].q, rb.states[i].q) && same_bits(ra.states[i].xi, rb.states[i].xi);
    }
    if (!same) return k;
  }
  if (a.records.size() != b.records.size()) return n;
  return std::nullopt;
}

}  // namespace wavesync
