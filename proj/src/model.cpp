#include "wavesync/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wavesync/error.hpp"

namespace wavesync {

Graph Graph::build(std::size_t n, std::span<const std::pair<AgentId, AgentId>> edges,
                   std::span<const AgentId> accessible) {
  if (n == 0) throw Error(ErrorCode::kIndexOutOfRange, "graph needs at least one agent");
  if (accessible.empty()) throw Error(ErrorCode::kEmptyAccessibleSet, "no accessible agents");

  Graph g;
  g.n_ = n;
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "edge (" + std::to_string(u) + ", " + std::to_string(v) + ") with n=" + std::to_string(n));
    }
    if (u == v) throw Error(ErrorCode::kSelfLoop, "self-loop at agent " + std::to_string(u));
    g.edges_.push_back(Edge{std::min(u, v), std::max(u, v)});
  }
  std::sort(g.edges_.begin(), g.edges_.end());
  g.edges_.erase(std::unique(g.edges_.begin(), g.edges_.end()), g.edges_.end());

  for (AgentId i : accessible) {
    if (i >= n) throw Error(ErrorCode::kIndexOutOfRange, "accessible agent " + std::to_string(i));
    g.accessible_.push_back(i);
  }
  std::sort(g.accessible_.begin(), g.accessible_.end());
  g.accessible_.erase(std::unique(g.accessible_.begin(), g.accessible_.end()), g.accessible_.end());

  g.delta_.assign(n, 0);
  for (AgentId i : g.accessible_) g.delta_[i] = 1;

  g.adjacency_.assign(n, {});
  for (std::size_t e = 0; e < g.edges_.size(); ++e) {
    const Edge& edge = g.edges_[e];
    g.adjacency_[edge.i].push_back({e, edge.j, EdgeSide::kI});
    g.adjacency_[edge.j].push_back({e, edge.i, EdgeSide::kJ});
  }

  // Connectivity by flood fill from agent 0.
  std::vector<unsigned char> seen(n, 0);
  std::vector<AgentId> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    AgentId u = stack.back();
    stack.pop_back();
    for (const Incidence& inc : g.adjacency_[u]) {
      if (!seen[inc.neighbor]) {
        seen[inc.neighbor] = 1;
        ++reached;
        stack.push_back(inc.neighbor);
      }
    }
  }
  if (reached != n) {
    throw Error(ErrorCode::kDisconnectedGraph,
                std::to_string(n - reached) + " of " + std::to_string(n) + " agents unreachable from agent 0");
  }
  return g;
}

std::size_t Graph::find_edge(AgentId i, AgentId j) const {
  const Edge key{std::min(i, j), std::max(i, j)};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return edges_.size();
  return static_cast<std::size_t>(it - edges_.begin());
}

Graph build_graph_one_based(std::size_t n, std::span<const std::pair<AgentId, AgentId>> edges,
                            std::span<const AgentId> accessible) {
  auto shift = [n](AgentId k) {
    if (k < 1 || k > n) throw Error(ErrorCode::kIndexOutOfRange, "agent index " + std::to_string(k) + " (1-based)");
    return k - 1;
  };
  std::vector<std::pair<AgentId, AgentId>> zero_edges;
  zero_edges.reserve(edges.size());
  for (const auto& [u, v] : edges) zero_edges.emplace_back(shift(u), shift(v));
  std::vector<AgentId> zero_accessible;
  zero_accessible.reserve(accessible.size());
  for (AgentId k : accessible) zero_accessible.push_back(shift(k));
  return Graph::build(n, zero_edges, zero_accessible);
}

CouplingMatrix::CouplingMatrix(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorCode::kNonPositiveGain, "a=" + std::to_string(a) + " b=" + std::to_string(b));
  }
}

std::array<std::array<double, 4>, 4> CouplingMatrix::dense() const noexcept {
  return {{{a_, 0.0, -b_, 0.0}, {0.0, a_, 0.0, -b_}, {b_, 0.0, 0.0, 0.0}, {0.0, b_, 0.0, 0.0}}};
}

Gains Gains::uniform(const Graph& graph, double a, double b, double sigma) {
  Gains g;
  g.a.assign(graph.edges().size(), a);
  g.b.assign(graph.edges().size(), b);
  g.sigma = sigma;
  g.validate(graph);
  return g;
}

void Gains::validate(const Graph& graph) const {
  if (a.size() != graph.edges().size() || b.size() != graph.edges().size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "gain vectors do not match the edge count");
  }
  for (std::size_t e = 0; e < a.size(); ++e) {
    if (!(a[e] > 0.0) || !(b[e] > 0.0) || !std::isfinite(a[e]) || !std::isfinite(b[e])) {
      throw Error(ErrorCode::kNonPositiveGain, "edge " + std::to_string(e));
    }
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kNonPositiveGain, "sigma=" + std::to_string(sigma));
  }
}

Vec2 average_accessible(std::span<const Vec2> positions, const Graph& graph) {
  if (positions.size() != graph.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "position count does not match the graph");
  }
  Vec2 sum;
  for (AgentId i : graph.accessible()) sum += positions[i];
  return sum * (1.0 / static_cast<double>(graph.accessible_count()));
}

Vec2 average_accessible(std::span<const RobotState> states, const Graph& graph) {
  if (states.size() != graph.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "state count does not match the graph");
  }
  Vec2 sum;
  for (AgentId i : graph.accessible()) sum += states[i].q;
  return sum * (1.0 / static_cast<double>(graph.accessible_count()));
}

std::vector<Vec2> biased_positions(std::span<const RobotState> states, std::span<const Vec2> biases) {
  std::vector<Vec2> eta;
  eta.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    eta.push_back(states[i].q + (i < biases.size() ? biases[i] : Vec2{}));
  }
  return eta;
}

}  // namespace wavesync
