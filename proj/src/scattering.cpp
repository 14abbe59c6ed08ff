#include "wavesync/scattering.hpp"

#include <cmath>

#include "wavesync/error.hpp"

namespace wavesync {

namespace {

void require_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kNonPositiveGain, "sigma must be positive");
  }
}

}  // namespace

WavePair encode_side_i(const Vec4& p, const Vec4& r, double sigma) {
  require_sigma(sigma);
  const double k = 1.0 / std::sqrt(2.0 * sigma);
  return {k * (sigma * r - p), k * (-p - sigma * r)};
}

WavePair encode_side_j(const Vec4& p, const Vec4& r, double sigma) {
  require_sigma(sigma);
  const double k = 1.0 / std::sqrt(2.0 * sigma);
  return {k * (p + sigma * r), k * (p - sigma * r)};
}

PowerPair decode_side_i(const WavePair& w, double sigma) {
  require_sigma(sigma);
  return {-std::sqrt(sigma / 2.0) * (w.s_plus + w.s_minus), (1.0 / std::sqrt(2.0 * sigma)) * (w.s_plus - w.s_minus)};
}

PowerPair decode_side_j(const WavePair& w, double sigma) {
  require_sigma(sigma);
  return {std::sqrt(sigma / 2.0) * (w.s_plus + w.s_minus), (1.0 / std::sqrt(2.0 * sigma)) * (w.s_plus - w.s_minus)};
}

Vec4 solve_shifted_coupling(const CouplingMatrix& m, double sigma, const Vec4& rhs) {
  // Per planar coordinate c: [[a + sigma, -b], [b, sigma]] [r_q; r_xi] = [rhs_q; rhs_xi].
  const double a = m.a();
  const double b = m.b();
  const double det = (a + sigma) * sigma + b * b;
  if (!(det > 0.0) || !std::isfinite(det)) throw Error(ErrorCode::kSingularCoupling, "det(M + sigma I) = 0");
  const double inv = 1.0 / det;
  Vec4 r;
  for (std::size_t c = 0; c < 2; ++c) {
    const double f = rhs[c];
    const double g = rhs[c + 2];
    r[c] = (sigma * f + b * g) * inv;
    r[c + 2] = ((a + sigma) * g - b * f) * inv;
  }
  return r;
}

EndpointSolution solve_endpoint_i(const Vec4& s_minus_in, const Vec4& x_i, const CouplingMatrix& m,
                                  double sigma) {
  require_sigma(sigma);
  const double root = std::sqrt(2.0 * sigma);
  EndpointSolution out;
  out.r = solve_shifted_coupling(m, sigma, m.apply(x_i) - root * s_minus_in);
  out.p = m.apply(out.r - x_i);
  out.s_out = (1.0 / root) * (sigma * out.r - out.p);
  return out;
}

EndpointSolution solve_endpoint_j(const Vec4& s_plus_in, const Vec4& x_j, const CouplingMatrix& m,
                                  double sigma) {
  require_sigma(sigma);
  const double root = std::sqrt(2.0 * sigma);
  EndpointSolution out;
  out.r = solve_shifted_coupling(m, sigma, root * s_plus_in + m.apply(x_j));
  out.p = m.apply(out.r - x_j);
  out.s_out = (1.0 / root) * (out.p - sigma * out.r);
  return out;
}

Vec4 reference_wave(Vec2 q_r, double sigma) {
  require_sigma(sigma);
  const double k = std::sqrt(sigma / 2.0);
  return Vec4{{k * q_r.x, k * q_r.y, 0.0, 0.0}};
}

}  // namespace wavesync
