#pragma once

#include <span>
#include <vector>

#include "wavesync/model.hpp"

namespace wavesync {

/// What robot i uses in place of neighbor j's (q_j, xi_j).
struct NeighborReference {
  Vec2 r_q;
  Vec2 r_xi;

  [[nodiscard]] constexpr Vec4 stacked() const noexcept { return Vec4::stack(r_q, r_xi); }
  static constexpr NeighborReference from_stacked(const Vec4& r) noexcept { return {r.head(), r.tail()}; }
};

struct ControlOutput {
  Vec2 q_dot;
  Vec2 xi_dot;
  Vec4 mu;  ///< sum of p_ij over neighbors
};

/// Consensus law with exact neighbor states:
///   xi_dot_i = sum_j b_ij (q_j - q_i)
///   q_dot_i  = sum_j a_ij (q_j - q_i) - sum_j b_ij (xi_j - xi_i) + delta_i u_h
std::vector<ControlOutput> delay_free_derivatives(std::span<const RobotState> states, const Graph& graph,
                                                  const Gains& gains, Vec2 u_h);

/// Row i of delay_free_derivatives.
ControlOutput delay_free_agent(AgentId i, std::span<const RobotState> states, const Graph& graph,
                               const Gains& gains, Vec2 u_h);

/// p_ij = M_ij (r_ij - x_i).
inline Vec4 coupling_output(const Vec4& x_i, const Vec4& r_ij, const CouplingMatrix& m_ij) noexcept {
  return m_ij.apply(r_ij - x_i);
}

/// Same law with neighbor references r_ij in place of neighbor states, written
/// in feedback form: mu_i = sum_j p_ij, [q_dot; xi_dot] = mu_i + [delta_i u_h; 0].
/// `refs[k]` pairs with `couplings[k]`.
ControlOutput delayed_derivatives(const Vec4& x_i, std::span<const Vec4> refs,
                                  std::span<const CouplingMatrix> couplings, bool accessible, Vec2 u_h);

/// Feedback-form assembly from an already summed mu_i.
inline ControlOutput from_mu(const Vec4& mu, bool accessible, Vec2 u_h) noexcept {
  ControlOutput out;
  out.mu = mu;
  out.q_dot = mu.head();
  if (accessible) out.q_dot += u_h;
  out.xi_dot = mu.tail();
  return out;
}

}  // namespace wavesync
