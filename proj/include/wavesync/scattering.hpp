#pragma once

#include "wavesync/model.hpp"

namespace wavesync {

/// A pair of wave variables on one edge endpoint.
struct WavePair {
  Vec4 s_plus;
  Vec4 s_minus;
};

/// Lower-index endpoint: s+ = (-p + sigma r)/sqrt(2 sigma), s- = (-p - sigma r)/sqrt(2 sigma).
WavePair encode_side_i(const Vec4& p, const Vec4& r, double sigma);
/// Higher-index endpoint: s+ = (p + sigma r)/sqrt(2 sigma), s- = (p - sigma r)/sqrt(2 sigma).
WavePair encode_side_j(const Vec4& p, const Vec4& r, double sigma);

/// Power pair recovered from a wave pair.
struct PowerPair {
  Vec4 p;
  Vec4 r;
};

PowerPair decode_side_i(const WavePair& w, double sigma);
PowerPair decode_side_j(const WavePair& w, double sigma);

/// Result of resolving one endpoint from its incoming wave and local state.
struct EndpointSolution {
  Vec4 r;      ///< neighbor reference r_ij
  Vec4 p;      ///< coupling output p_ij = M (r - x)
  Vec4 s_out;  ///< outgoing wave (s+ on side i, s- on side j)
};

/// Solves (M + sigma I) r = M x - sqrt(2 sigma) s-_in for side i.
EndpointSolution solve_endpoint_i(const Vec4& s_minus_in, const Vec4& x_i, const CouplingMatrix& m,
                                  double sigma);
/// Solves (M + sigma I) r = sqrt(2 sigma) s+_in + M x for side j.
EndpointSolution solve_endpoint_j(const Vec4& s_plus_in, const Vec4& x_j, const CouplingMatrix& m,
                                  double sigma);

/// Applies (M + sigma I)^-1 using the 2x2 block structure of M.
Vec4 solve_shifted_coupling(const CouplingMatrix& m, double sigma, const Vec4& rhs);

/// s_q = [sqrt(sigma/2) q_r; 0], the wave value at the consensus point q_r.
Vec4 reference_wave(Vec2 q_r, double sigma);

}  // namespace wavesync
