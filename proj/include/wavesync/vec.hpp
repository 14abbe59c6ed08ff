#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace wavesync {

/// Planar vector in field coordinates (meters, or m/s for velocities).
struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) noexcept {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2& operator-=(const Vec2& o) noexcept {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2& operator*=(double s) noexcept {
    x *= s;
    y *= s;
    return *this;
  }

  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) noexcept { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) noexcept { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2& a) noexcept { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return a *= s; }
  friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return a *= s; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double squared_norm(const Vec2& a) noexcept { return dot(a, a); }
inline double norm(const Vec2& a) noexcept { return std::hypot(a.x, a.y); }
inline bool is_finite(const Vec2& a) noexcept { return std::isfinite(a.x) && std::isfinite(a.y); }

/// Stacked per-robot vector, always ordered (q.x, q.y, xi.x, xi.y).
struct Vec4 {
  std::array<double, 4> v{};

  constexpr double& operator[](std::size_t i) noexcept { return v[i]; }
  constexpr double operator[](std::size_t i) const noexcept { return v[i]; }

  [[nodiscard]] constexpr Vec2 head() const noexcept { return {v[0], v[1]}; }
  [[nodiscard]] constexpr Vec2 tail() const noexcept { return {v[2], v[3]}; }

  static constexpr Vec4 stack(const Vec2& head, const Vec2& tail) noexcept {
    return Vec4{{head.x, head.y, tail.x, tail.y}};
  }

  constexpr Vec4& operator+=(const Vec4& o) noexcept {
    for (std::size_t i = 0; i < 4; ++i) v[i] += o.v[i];
    return *this;
  }
  constexpr Vec4& operator-=(const Vec4& o) noexcept {
    for (std::size_t i = 0; i < 4; ++i) v[i] -= o.v[i];
    return *this;
  }
  constexpr Vec4& operator*=(double s) noexcept {
    for (auto& c : v) c *= s;
    return *this;
  }

  friend constexpr Vec4 operator+(Vec4 a, const Vec4& b) noexcept { return a += b; }
  friend constexpr Vec4 operator-(Vec4 a, const Vec4& b) noexcept { return a -= b; }
  friend constexpr Vec4 operator-(Vec4 a) noexcept { return a *= -1.0; }
  friend constexpr Vec4 operator*(double s, Vec4 a) noexcept { return a *= s; }
  friend constexpr Vec4 operator*(Vec4 a, double s) noexcept { return a *= s; }
  friend constexpr bool operator==(const Vec4&, const Vec4&) = default;
};

constexpr double dot(const Vec4& a, const Vec4& b) noexcept {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}
constexpr double squared_norm(const Vec4& a) noexcept { return dot(a, a); }
inline double norm(const Vec4& a) noexcept { return std::sqrt(squared_norm(a)); }
inline double max_abs(const Vec4& a) noexcept {
  double m = 0.0;
  for (double c : a.v) m = std::fmax(m, std::fabs(c));
  return m;
}
inline bool is_finite(const Vec4& a) noexcept {
  return std::isfinite(a[0]) && std::isfinite(a[1]) && std::isfinite(a[2]) && std::isfinite(a[3]);
}

}  // namespace wavesync
