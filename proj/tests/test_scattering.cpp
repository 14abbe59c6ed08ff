#include <doctest.h>

#include "support.hpp"
#include "wavesync/delay_line.hpp"
#include "wavesync/error.hpp"
#include "wavesync/scattering.hpp"

using namespace wavesync;
using wavesync::test::Rng;

namespace {

/// r = (M + sigma I)^-1 rhs via a generic dense LU, independent of the block solve.
Vec4 dense_solve(double a, double b, double sigma, const Vec4& rhs) {
  const Eigen::Matrix4d lhs = test::dense_coupling(a, b) + sigma * Eigen::Matrix4d::Identity();
  return test::from_eigen(lhs.fullPivLu().solve(test::to_eigen(rhs)));
}

}  // namespace

TEST_SUITE("scattering") {

TEST_CASE("encoder examples") {
  const WavePair zero = encode_side_i(Vec4{}, Vec4{}, 1.0);
  CHECK(max_abs(zero.s_plus) == 0.0);
  CHECK(max_abs(zero.s_minus) == 0.0);

  const double h = 1.0 / std::sqrt(2.0);
  const WavePair w = encode_side_i(Vec4{}, Vec4{{1, 0, 0, 0}}, 1.0);
  CHECK(test::max_diff(w.s_plus, Vec4{{h, 0, 0, 0}}) <= 1e-16);
  CHECK(test::max_diff(w.s_minus, Vec4{{-h, 0, 0, 0}}) <= 1e-16);

  const WavePair wj = encode_side_j(Vec4{{1, 0, 0, 0}}, Vec4{}, 2.0);
  CHECK(test::max_diff(wj.s_plus, Vec4{{0.5, 0, 0, 0}}) <= 1e-16);
  CHECK(test::max_diff(wj.s_minus, Vec4{{0.5, 0, 0, 0}}) <= 1e-16);
}

TEST_CASE("explicit inversion formulas recover (p, r)") {
  Rng rng(41);
  for (int k = 0; k < 20000; ++k) {
    const double sigma = rng.uniform(0.05, 10.0);
    const Vec4 sp = rng.vec4(3.0);
    const Vec4 sm = rng.vec4(3.0);
    // Side i: r = (s+ - s-)/sqrt(2 sigma), p = -sqrt(sigma/2)(s+ + s-).
    const Vec4 r = (1.0 / std::sqrt(2.0 * sigma)) * (sp - sm);
    const Vec4 p = -std::sqrt(sigma / 2.0) * (sp + sm);
    const WavePair back = encode_side_i(p, r, sigma);
    CHECK(test::max_diff(back.s_plus, sp) <= 1e-12);
    CHECK(test::max_diff(back.s_minus, sm) <= 1e-12);
    const PowerPair pr = decode_side_i({sp, sm}, sigma);
    CHECK(test::max_diff(pr.p, p) <= 1e-12);
    CHECK(test::max_diff(pr.r, r) <= 1e-12);
  }
}

TEST_CASE("encode and decode are inverse on both sides") {
  Rng rng(43);
  for (int k = 0; k < 20000; ++k) {
    const double sigma = rng.uniform(0.05, 10.0);
    const Vec4 p = rng.vec4(5.0);
    const Vec4 r = rng.vec4(5.0);
    const PowerPair bi = decode_side_i(encode_side_i(p, r, sigma), sigma);
    const PowerPair bj = decode_side_j(encode_side_j(p, r, sigma), sigma);
    CHECK(test::max_diff(bi.p, p) <= 1e-10);
    CHECK(test::max_diff(bi.r, r) <= 1e-10);
    CHECK(test::max_diff(bj.p, p) <= 1e-10);
    CHECK(test::max_diff(bj.r, r) <= 1e-10);
  }
}

TEST_CASE("wave power balance") {
  Rng rng(47);
  for (int k = 0; k < 10000; ++k) {
    const double sigma = rng.uniform(0.05, 10.0);
    const Vec4 p = rng.vec4(2.0);
    const Vec4 r = rng.vec4(2.0);
    const WavePair wj = encode_side_j(p, r, sigma);
    CHECK(squared_norm(wj.s_plus) - squared_norm(wj.s_minus) == doctest::Approx(2.0 * dot(p, r)).epsilon(1e-12));
    const WavePair wi = encode_side_i(p, r, sigma);
    CHECK(squared_norm(wi.s_plus) - squared_norm(wi.s_minus) ==
          doctest::Approx(-2.0 * dot(p, r)).epsilon(1e-12));
  }
}

TEST_CASE("endpoint solve on side i: worked example") {
  const CouplingMatrix m(0.2, 0.05);
  const EndpointSolution sol = solve_endpoint_i(Vec4{}, Vec4{{1, 0, 0, 0}}, m, 1.0);
  // [[1.2, -0.05], [0.05, 1]] r = [0.2, 0.05] per coordinate.
  CHECK(sol.r[0] == doctest::Approx(0.2025 / 1.2025).epsilon(1e-14));
  CHECK(sol.r[2] == doctest::Approx(0.05 / 1.2025).epsilon(1e-14));
  CHECK(sol.r[0] == doctest::Approx(0.16840).epsilon(1e-4));
  CHECK(sol.r[2] == doctest::Approx(0.04158).epsilon(1e-3));
  CHECK(sol.r[1] == 0.0);
  CHECK(sol.r[3] == 0.0);
  CHECK(test::max_diff(sol.p, m.apply(sol.r - Vec4{{1, 0, 0, 0}})) <= 1e-16);

  const EndpointSolution zero = solve_endpoint_i(Vec4{}, Vec4{}, m, 1.0);
  CHECK(max_abs(zero.r) == 0.0);
  CHECK(max_abs(zero.p) == 0.0);
  CHECK(max_abs(zero.s_out) == 0.0);
  const EndpointSolution zero_j = solve_endpoint_j(Vec4{}, Vec4{}, m, 1.0);
  CHECK(max_abs(zero_j.r) == 0.0);
  CHECK(max_abs(zero_j.s_out) == 0.0);
}

TEST_CASE("stationary waves make the endpoints see the consensus state") {
  Rng rng(53);
  for (int k = 0; k < 1000; ++k) {
    const double sigma = rng.uniform(0.1, 5.0);
    const CouplingMatrix m(rng.uniform(0.05, 2.0), rng.uniform(0.05, 2.0));
    const Vec4 x = Vec4::stack(rng.vec2(3.0), rng.vec2(3.0));
    const double c = std::sqrt(sigma / 2.0);
    const EndpointSolution si = solve_endpoint_i(-c * x, x, m, sigma);
    CHECK(test::max_diff(si.r, x) <= 1e-12);
    CHECK(max_abs(si.p) <= 1e-12);
    CHECK(test::max_diff(si.s_out, c * x) <= 1e-12);
    const EndpointSolution sj = solve_endpoint_j(c * x, x, m, sigma);
    CHECK(test::max_diff(sj.r, x) <= 1e-12);
    CHECK(max_abs(sj.p) <= 1e-12);
    CHECK(test::max_diff(sj.s_out, -c * x) <= 1e-12);
  }
}

TEST_CASE("block solve agrees with a dense LU solve") {
  Rng rng(59);
  for (int k = 0; k < 20000; ++k) {
    const double a = rng.uniform(0.01, 5.0);
    const double b = rng.uniform(0.01, 5.0);
    const double sigma = rng.uniform(0.05, 10.0);
    const Vec4 rhs = rng.vec4(10.0);
    const Vec4 got = solve_shifted_coupling(CouplingMatrix(a, b), sigma, rhs);
    CHECK(test::max_diff(got, dense_solve(a, b, sigma, rhs)) <= 1e-10);
  }
}

TEST_CASE("endpoint solves match the dense oracle and re-encode their input") {
  Rng rng(61);
  for (int k = 0; k < 20000; ++k) {
    const double a = rng.uniform(0.01, 3.0);
    const double b = rng.uniform(0.01, 3.0);
    const double sigma = rng.uniform(0.05, 10.0);
    const CouplingMatrix m(a, b);
    const Vec4 x = rng.vec4(3.0);
    const Vec4 s_in = rng.vec4(3.0);
    const Eigen::Vector4d mx = test::dense_coupling(a, b) * test::to_eigen(x);

    const EndpointSolution si = solve_endpoint_i(s_in, x, m, sigma);
    const Vec4 ri = dense_solve(a, b, sigma, test::from_eigen(mx) - std::sqrt(2.0 * sigma) * s_in);
    CHECK(test::max_diff(si.r, ri) <= 1e-10);
    const WavePair wi = encode_side_i(si.p, si.r, sigma);
    CHECK(test::max_diff(wi.s_minus, s_in) <= 1e-10);
    CHECK(test::max_diff(wi.s_plus, si.s_out) <= 1e-12);

    const EndpointSolution sj = solve_endpoint_j(s_in, x, m, sigma);
    const Vec4 rj = dense_solve(a, b, sigma, std::sqrt(2.0 * sigma) * s_in + test::from_eigen(mx));
    CHECK(test::max_diff(sj.r, rj) <= 1e-10);
    const WavePair wj = encode_side_j(sj.p, sj.r, sigma);
    CHECK(test::max_diff(wj.s_plus, s_in) <= 1e-10);
    CHECK(test::max_diff(wj.s_minus, sj.s_out) <= 1e-12);
  }
}

TEST_CASE("reference wave") {
  const Vec4 s = reference_wave({0.55, 0.60}, 2.0);
  CHECK(test::max_diff(s, Vec4{{0.55, 0.60, 0, 0}}) <= 1e-16);
}

}  // TEST_SUITE

TEST_SUITE("delay_line") {

TEST_CASE("half-second delay at 100 Hz emerges after 50 steps") {
  DelayLine line(0.5, 0.01);
  CHECK(line.depth() == 50);
  const Vec4 marker{{1, 2, 3, 4}};
  for (int k = 0; k <= 60; ++k) {
    const Vec4 out = line.push_pop(k == 0 ? marker : Vec4{}, k * 0.01);
    if (k == 50) {
      CHECK(test::max_diff(out, marker) == 0.0);
    } else {
      CHECK(max_abs(out) == 0.0);
    }
  }
}

TEST_CASE("zero history before the delay has elapsed") {
  DelayLine line(0.3, 0.1);
  for (int k = 0; k < 3; ++k) CHECK(max_abs(line.push_pop(Vec4{{1, 1, 1, 1}}, k * 0.1)) == 0.0);
  CHECK(max_abs(line.push_pop(Vec4{{1, 1, 1, 1}}, 0.3)) == 1.0);
}

TEST_CASE("zero delay passes through within the step") {
  DelayLine line(0.0, 0.01);
  CHECK(line.depth() == 0);
  const Vec4 s{{0.1, -0.2, 0.3, -0.4}};
  CHECK(test::max_diff(line.push_pop(s, 0.0), s) == 0.0);
  CHECK(test::max_diff(line.push_pop(2.0 * s, 0.01), 2.0 * s) == 0.0);
}

TEST_CASE("delay must sit on the dt grid") {
  CHECK_THROWS_AS(DelayLine(0.505, 0.01), Error);
  CHECK_THROWS_AS(DelayLine(-1.0, 0.01), Error);
  CHECK_THROWS_AS(DelayLine(0.5, 0.0), Error);
  try {
    DelayLine(0.123, 0.01);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidDelay);
  }
  CHECK_NOTHROW(DelayLine(0.3, 0.1));  // 0.3 / 0.1 is 2.9999999999999996
}

TEST_CASE("non-monotone or off-grid pushes are cadence violations") {
  DelayLine line(0.1, 0.01);
  line.push(Vec4{}, 0.05);
  try {
    line.push(Vec4{}, 0.05);
    FAIL("repeated timestamp accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCadenceViolation);
  }
  CHECK_THROWS_AS(line.push(Vec4{}, 0.04), Error);
  CHECK_THROWS_AS(line.push(Vec4{}, 0.0655), Error);
}

TEST_CASE("lossless and order preserving") {
  Rng rng(67);
  for (int trial = 0; trial < 50; ++trial) {
    const int depth = trial % 13;
    DelayLine line(depth * 0.02, 0.02);
    std::vector<Vec4> pushed;
    for (int k = 0; k < 400; ++k) {
      pushed.push_back(rng.vec4());
      const Vec4 out = line.push_pop(pushed.back(), k * 0.02);
      const Vec4 expected = k >= depth ? pushed[static_cast<std::size_t>(k - depth)] : Vec4{};
      CHECK(test::max_diff(out, expected) == 0.0);
    }
    CHECK(line.buffered() <= static_cast<std::size_t>(depth) + 1);
  }
}

TEST_CASE("window before a tick lists the in-flight samples oldest first") {
  DelayLine line(0.04, 0.01);
  for (int k = 0; k < 10; ++k) line.push_tick(Vec4{{double(k), 0, 0, 0}}, k);
  const auto w = line.window_before(10);
  REQUIRE(w.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(w[static_cast<std::size_t>(k)][0] == 6.0 + k);

  DelayLine fresh(0.04, 0.01);
  fresh.push_tick(Vec4{{7, 0, 0, 0}}, 0);
  const auto early = fresh.window_before(1);
  CHECK(early[0][0] == 0.0);
  CHECK(early[3][0] == 7.0);
}

TEST_CASE("prefilled history reads back") {
  DelayLine line(0.05, 0.01);
  line.prefill(Vec4{{2, 2, 2, 2}}, -5, 5);
  for (int k = 0; k < 5; ++k) CHECK(line.read_tick(k)[0] == 2.0);
  line.push_tick(Vec4{}, 0);
  CHECK(line.read_tick(5)[0] == 0.0);
}

}  // TEST_SUITE
