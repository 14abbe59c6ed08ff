#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "wavesync/model.hpp"
#include "wavesync/scenario.hpp"
#include "wavesync/vec.hpp"

namespace wavesync::test {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  Vec2 vec2(double scale = 1.0) { return {scale * uniform(), scale * uniform()}; }
  Vec4 vec4(double scale = 1.0) {
    return Vec4{{scale * uniform(), scale * uniform(), scale * uniform(), scale * uniform()}};
  }
  RobotState state(double scale = 1.0) { return {vec2(scale), vec2(scale)}; }
  std::vector<RobotState> states(std::size_t n, double scale = 1.0) {
    std::vector<RobotState> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(state(scale));
    return out;
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

inline Eigen::Vector4d to_eigen(const Vec4& v) { return {v.v[0], v.v[1], v.v[2], v.v[3]}; }
inline Vec4 from_eigen(const Eigen::Vector4d& v) { return Vec4{{v[0], v[1], v[2], v[3]}}; }

/// The coupling matrix written out entry by entry, independent of CouplingMatrix.
inline Eigen::Matrix4d dense_coupling(double a, double b) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  m(0, 0) = a;
  m(1, 1) = a;
  m(0, 2) = -b;
  m(1, 3) = -b;
  m(2, 0) = b;
  m(3, 1) = b;
  return m;
}

inline double max_diff(const Vec4& a, const Vec4& b) { return max_abs(a - b); }
inline double max_diff(Vec2 a, Vec2 b) { return std::max(std::fabs(a.x - b.x), std::fabs(a.y - b.y)); }

/// Random connected graph: a random spanning tree plus extra edges.
inline Graph random_graph(Rng& rng, std::size_t n, std::size_t extra) {
  std::vector<std::pair<AgentId, AgentId>> edges;
  for (std::size_t i = 1; i < n; ++i) {
    const auto parent = static_cast<AgentId>(std::uniform_int_distribution<std::size_t>(0, i - 1)(rng.engine()));
    edges.emplace_back(parent, static_cast<AgentId>(i));
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t k = 0; k < extra; ++k) {
    const auto i = static_cast<AgentId>(pick(rng.engine()));
    const auto j = static_cast<AgentId>(pick(rng.engine()));
    if (i != j) edges.emplace_back(i, j);
  }
  std::vector<AgentId> accessible{0};
  if (n > 2) accessible.push_back(static_cast<AgentId>(n / 2));
  return Graph::build(n, edges, accessible);
}

}  // namespace wavesync::test
