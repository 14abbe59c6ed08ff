#include <doctest.h>

#include "support.hpp"
#include "wavesync/error.hpp"
#include "wavesync/monitor.hpp"
#include "wavesync/scattering.hpp"

using namespace wavesync;
using wavesync::test::Rng;

namespace {

StepRecord record_at(double t, Vec2 q, Vec2 u = {}) {
  StepRecord r;
  r.t = t;
  r.step = static_cast<std::int64_t>(std::llround(t * 100));
  r.states = {{q, {}}, {q, {}}};
  r.z = q;
  r.u_h = u;
  return r;
}

}  // namespace

TEST_SUITE("monitor") {

TEST_CASE("robot storage examples") {
  CHECK(robot_storage(Vec4::stack({0.55, 0.60}, {}), {0.55, 0.60}) == 0.0);
  CHECK(robot_storage(Vec4::stack({1.55, 0.60}, {0, 1}), {0.55, 0.60}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(robot_storage(Vec4::stack({2.6, 1.6}, {}), {0.55, 0.60}) == doctest::Approx(2.60125).epsilon(1e-14));
}

TEST_CASE("channel storage examples") {
  const Vec2 q_r{0.55, 0.60};
  const Vec4 s_q = reference_wave(q_r, 1.0);
  const std::vector<Vec4> at_plus(51, s_q);
  const std::vector<Vec4> at_minus(51, -s_q);
  CHECK(channel_storage(at_plus, at_minus, q_r, 1.0, 0.5) == 0.0);

  const std::vector<Vec4> zeros(51);
  CHECK(channel_storage(zeros, zeros, q_r, 1.0, 0.5) == doctest::Approx(0.165625).epsilon(1e-14));

  CHECK(channel_storage({}, {}, q_r, 1.0, 0.0) == 0.0);
  try {
    channel_storage(std::vector<Vec4>(1), std::vector<Vec4>(1), q_r, 1.0, 0.5);
    FAIL("one-sample window accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInsufficientHistory);
  }
  CHECK_THROWS_AS(channel_storage(std::vector<Vec4>(3), std::vector<Vec4>(4), q_r, 1.0, 0.5), Error);
}

TEST_CASE("channel storage is trapezoidal") {
  // Integrand 1/2 |s+|^2 with s+ ramping 0..1 in one coordinate and q_r = 0:
  // trapezoid of 1/2 t^2 on [0, 1] with two intervals is (0 + 2*0.125 + 0.5)/4.
  const std::vector<Vec4> plus{Vec4{}, Vec4{{0.5, 0, 0, 0}}, Vec4{{1, 0, 0, 0}}};
  const std::vector<Vec4> minus(3);
  CHECK(channel_storage(plus, minus, {}, 1.0, 1.0) == doctest::Approx(0.1875).epsilon(1e-15));
}

TEST_CASE("storages are never negative") {
  Rng rng(73);
  for (int k = 0; k < 2000; ++k) {
    const Vec2 q_r = rng.vec2(2.0);
    CHECK(robot_storage(rng.vec4(3.0), q_r) >= 0.0);
    std::vector<Vec4> p, m;
    for (int j = 0; j < 5; ++j) {
      p.push_back(rng.vec4());
      m.push_back(rng.vec4());
    }
    CHECK(channel_storage(p, m, q_r, rng.uniform(0.1, 3.0), 0.04) >= 0.0);
  }
}

TEST_CASE("ledger totals divide by the accessible count") {
  EnergyLedger l;
  l.robot = {1.0, 2.0, 3.0};
  l.channel = {0.5, 0.5};
  l.human_integral = -1.0;
  finalize_ledger(l, 2);
  CHECK(l.total == 3.5);
  CHECK(l.energy == 2.5);
}

TEST_CASE("passivity residual") {
  EnergyLedger a, b;
  a.total = 1.0;
  b.total = 0.99;
  CHECK(passivity_residual(a, b, {}, {}, 0.01) == doctest::Approx(-1.0));
  CHECK(passivity_residual(a, b, {1, 0}, {-2, 0}, 0.01) == doctest::Approx(1.0));
  CHECK(residual_tolerance(0.01) == 0.01);
  CHECK(human_energy_increment({1, 0}, {-1, 0}, 0.5, 0.1) == doctest::Approx(0.05));
}

TEST_CASE("arrival time is the start of the final stretch inside the radius") {
  TrajectoryLog log;
  log.dt = 0.01;
  const Vec2 q_r{0, 0};
  log.records = {record_at(0.00, {1, 0}), record_at(0.01, {0.01, 0}), record_at(0.02, {0.2, 0}),
                 record_at(0.03, {0.04, 0}), record_at(0.04, {0.0, 0})};
  const Metrics m = compute_metrics(log, q_r);
  REQUIRE(m.arrival_time);
  CHECK(*m.arrival_time == 0.03);
  CHECK(m.final_tracking_error == 0.0);

  log.records.push_back(record_at(0.05, {0.06, 0}));
  CHECK_FALSE(compute_metrics(log, q_r).arrival_time);

  TrajectoryLog home;
  home.records = {record_at(0.0, {0.01, 0.01}), record_at(0.01, {0.0, 0.0})};
  CHECK(*compute_metrics(home, q_r).arrival_time == 0.0);
}

TEST_CASE("input total variation") {
  TrajectoryLog flat;
  for (int k = 0; k < 10; ++k) flat.records.push_back(record_at(k * 0.01, {}, {0.3, 0.4}));
  CHECK(compute_metrics(flat, {}).input_total_variation == 0.0);

  TrajectoryLog wobble;
  for (int k = 0; k < 5; ++k) wobble.records.push_back(record_at(k * 0.01, {}, {k % 2 ? 0.3 : 0.0, 0.4}));
  CHECK(compute_metrics(wobble, {}).input_total_variation == doctest::Approx(1.2));
}

TEST_CASE("max residual reports the largest value even when negative") {
  TrajectoryLog log;
  for (int k = 0; k < 3; ++k) log.records.push_back(record_at(k * 0.01, {}));
  log.records[0].residual = -0.3;
  log.records[1].residual = -0.1;
  CHECK(compute_metrics(log, {}).max_residual == -0.1);
}

}  // TEST_SUITE
