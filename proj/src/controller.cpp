#include "wavesync/controller.hpp"

#include "wavesync/error.hpp"

namespace wavesync {

ControlOutput delay_free_agent(AgentId i, std::span<const RobotState> states, const Graph& graph,
                               const Gains& gains, Vec2 u_h) {
  Vec2 q_dot;
  Vec2 xi_dot;
  for (const Incidence& inc : graph.neighbors(i)) {
    const double a = gains.a[inc.edge];
    const double b = gains.b[inc.edge];
    const Vec2 dq = states[inc.neighbor].q - states[i].q;
    const Vec2 dxi = states[inc.neighbor].xi - states[i].xi;
    q_dot += a * dq - b * dxi;
    xi_dot += b * dq;
  }
  return from_mu(Vec4::stack(q_dot, xi_dot), graph.is_accessible(i), u_h);
}

std::vector<ControlOutput> delay_free_derivatives(std::span<const RobotState> states, const Graph& graph,
                                                  const Gains& gains, Vec2 u_h) {
  if (states.size() != graph.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "state count does not match the graph");
  }
  std::vector<ControlOutput> out(states.size());
  for (AgentId i = 0; i < states.size(); ++i) out[i] = delay_free_agent(i, states, graph, gains, u_h);
  return out;
}

ControlOutput delayed_derivatives(const Vec4& x_i, std::span<const Vec4> refs,
                                  std::span<const CouplingMatrix> couplings, bool accessible, Vec2 u_h) {
  if (refs.size() != couplings.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "one coupling per neighbor reference required");
  }
  Vec4 mu;
  for (std::size_t k = 0; k < refs.size(); ++k) mu += coupling_output(x_i, refs[k], couplings[k]);
  return from_mu(mu, accessible, u_h);
}

}  // namespace wavesync
