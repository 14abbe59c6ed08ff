#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "wavesync/vec.hpp"

namespace wavesync {

using AgentId = std::size_t;

/// Position and controller integrator of one robot.
struct RobotState {
  Vec2 q;
  Vec2 xi;

  [[nodiscard]] constexpr Vec4 stacked() const noexcept { return Vec4::stack(q, xi); }
  static constexpr RobotState from_stacked(const Vec4& x) noexcept { return {x.head(), x.tail()}; }

  friend constexpr bool operator==(const RobotState&, const RobotState&) = default;
};

/// Undirected edge stored in canonical order (i < j). Indices are 0-based.
struct Edge {
  AgentId i = 0;
  AgentId j = 0;

  friend constexpr auto operator<=>(const Edge&, const Edge&) = default;
};

/// Which end of an edge an agent sits on. The lower index is side i: it sends
/// s+ and receives s-. The higher index is side j.
enum class EdgeSide { kI, kJ };

/// One entry of an agent's neighbor list.
struct Incidence {
  std::size_t edge = 0;
  AgentId neighbor = 0;
  EdgeSide side = EdgeSide::kI;
};

/// Fixed, undirected, connected communication graph plus the accessible set.
class Graph {
 public:
  /// Validates and canonicalizes. Indices are 0-based; use
  /// `build_graph_one_based` at file boundaries.
  static Graph build(std::size_t n, std::span<const std::pair<AgentId, AgentId>> edges,
                     std::span<const AgentId> accessible);

  [[nodiscard]] std::size_t size() const noexcept { return n_; }
  [[nodiscard]] std::span<const Edge> edges() const noexcept { return edges_; }
  [[nodiscard]] std::span<const AgentId> accessible() const noexcept { return accessible_; }
  [[nodiscard]] std::size_t accessible_count() const noexcept { return accessible_.size(); }
  [[nodiscard]] bool is_accessible(AgentId i) const { return delta_.at(i) != 0; }
  [[nodiscard]] std::span<const Incidence> neighbors(AgentId i) const { return adjacency_.at(i); }
  /// Index of edge {i, j} in `edges()`, or `edges().size()` if absent.
  [[nodiscard]] std::size_t find_edge(AgentId i, AgentId j) const;

  friend bool operator==(const Graph& a, const Graph& b) {
    return a.n_ == b.n_ && a.edges_ == b.edges_ && a.accessible_ == b.accessible_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<AgentId> accessible_;
  std::vector<unsigned char> delta_;
  std::vector<std::vector<Incidence>> adjacency_;
};

/// Same as Graph::build but with 1-based indices, as used in scenario files.
Graph build_graph_one_based(std::size_t n, std::span<const std::pair<AgentId, AgentId>> edges,
                            std::span<const AgentId> accessible);

/// The 4x4 block map [[a I, -b I], [b I, 0]].
class CouplingMatrix {
 public:
  CouplingMatrix(double a, double b);

  [[nodiscard]] double a() const noexcept { return a_; }
  [[nodiscard]] double b() const noexcept { return b_; }

  [[nodiscard]] Vec4 apply(const Vec4& x) const noexcept {
    return Vec4{{a_ * x[0] - b_ * x[2], a_ * x[1] - b_ * x[3], b_ * x[0], b_ * x[1]}};
  }
  [[nodiscard]] std::array<std::array<double, 4>, 4> dense() const noexcept;

 private:
  double a_;
  double b_;
};

inline CouplingMatrix coupling_matrix(double a, double b) { return CouplingMatrix(a, b); }

/// Per-edge symmetric gains plus the wave impedance. Vectors are indexed like
/// Graph::edges().
struct Gains {
  std::vector<double> a;
  std::vector<double> b;
  double sigma = 1.0;

  static Gains uniform(const Graph& graph, double a, double b, double sigma);
  /// Throws NonPositiveGain / IndexOutOfRange if inconsistent with the graph.
  void validate(const Graph& graph) const;
  [[nodiscard]] CouplingMatrix coupling(std::size_t edge) const { return {a.at(edge), b.at(edge)}; }
};

/// z = (1/m) sum of q_i over the accessible set.
Vec2 average_accessible(std::span<const Vec2> positions, const Graph& graph);
Vec2 average_accessible(std::span<const RobotState> states, const Graph& graph);

/// Real (rendered) positions eta_i = q_i + d_i. Never used for control.
std::vector<Vec2> biased_positions(std::span<const RobotState> states, std::span<const Vec2> biases);

}  // namespace wavesync
