#include "sloshfree/metrics.hpp"

#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numbers>

using namespace sloshfree;

namespace {

/// Synthetic log with prescribed error traces; everything else is inert.
RunLog synthetic_log(int steps, double dt) {
  RunLog log;
  log.dt = dt;
  for (int k = 0; k <= steps; ++k) {
    StepRecord r;
    r.t = k * dt;
    r.state.q = VecX::Zero(1);
    r.state.qd = VecX::Zero(1);
    r.state.qdd = VecX::Zero(1);
    log.steps.push_back(r);
  }
  return log;
}

}  // namespace

TEST_CASE("slosh angle pointwise values", "[metrics]") {
  const Vec3 g = default_gravity_comp();
  // at rest, upright: no angle
  SloshAngle a = slosh_free_angle(Vec3::Zero(), Mat3::Identity(), g);
  CHECK_FALSE(a.degenerate);
  CHECK(a.angle == 0.0);
  // one g sideways, upright container: exactly 45 degrees
  a = slosh_free_angle(Vec3(kGravity, 0, 0), Mat3::Identity(), g);
  CHECK(std::abs(a.angle - std::numbers::pi / 4.0) < 1e-12);
  // same acceleration, container tilted onto the resultant: zero again
  const Vec3 f = Vec3(kGravity, 0, kGravity).normalized();
  const Vec3 axis = Vec3(0, 0, 1).cross(f).normalized();
  const Mat3 R = Eigen::AngleAxisd(std::acos(f.z()), axis).toRotationMatrix();
  a = slosh_free_angle(Vec3(kGravity, 0, 0), R, g);
  CHECK(a.angle < 1e-12);
  // container upside down at rest: the full pi
  a = slosh_free_angle(Vec3::Zero(), rot_x(std::numbers::pi), g);
  CHECK(std::abs(a.angle - std::numbers::pi) < 1e-12);
  // free fall: undefined
  a = slosh_free_angle(Vec3(0, 0, -kGravity), Mat3::Identity(), g);
  CHECK(a.degenerate);
}

TEST_CASE("trapezoid integration of the error traces", "[metrics]") {
  const double dt = 1e-3;
  RunLog log = synthetic_log(1000, dt);
  // e_p(t) = t is integrated exactly by the trapezoid rule
  for (auto& s : log.steps) s.e_p = s.t;
  // e_sf(t) = sin(pi t) has integral 2/pi on [0,1]
  for (auto& s : log.steps) s.e_sf = std::sin(std::numbers::pi * s.t);
  const RunMetrics m = aggregate(log, 0.2);
  CHECK(std::abs(m.E_p - 0.5) < 1e-12);
  CHECK(std::abs(m.E_sf - 2.0 / std::numbers::pi) < 1e-6);
  CHECK(std::abs(m.max_e_sf - 1.0) < 1e-5);  // peak at t = 0.5, after the transient
  CHECK(m.Sl == 0.0);
  CHECK_FALSE(m.infeasible);
}

TEST_CASE("transient exclusion only affects the peak statistic", "[metrics]") {
  RunLog log = synthetic_log(1000, 1e-3);
  log.steps[100].e_sf = 5.0;  // t = 0.1, inside the transient window
  log.steps[500].e_sf = 0.5;  // t = 0.5
  const RunMetrics m = aggregate(log, 0.2);
  CHECK(m.max_e_sf == 0.5);
  CHECK(m.E_sf > 0.0);  // the spike still contributes to the integral
}

TEST_CASE("slack integral uses the activation threshold", "[metrics]") {
  RunLog log = synthetic_log(1000, 1e-3);
  // sub-threshold slack everywhere: numerically quiet, counts as zero
  for (auto& s : log.steps) s.slack = Vec6::Constant(1e-5);
  RunMetrics m = aggregate(log, 0.2);
  CHECK(m.Sl == 0.0);
  CHECK_FALSE(m.infeasible);

  // active slack on one axis for 201 consecutive samples spanning 0.2 s;
  // the trapezoid rule adds half an interval at each edge of the window
  for (size_t k = 0; k < log.steps.size(); ++k)
    log.steps[k].slack =
        (k >= 200 && k <= 400) ? Vec6(Vec6::Unit(2) * 2e-3) : Vec6(Vec6::Zero());
  m = aggregate(log, 0.2);
  CHECK(m.infeasible);
  CHECK(std::abs(m.Sl - (2e-3 * 0.2 + 2e-3 * 1e-3)) < 1e-12);
}

TEST_CASE("degenerate slosh samples are skipped, not integrated", "[metrics]") {
  RunLog log = synthetic_log(100, 1e-2);
  for (auto& s : log.steps) s.e_sf = 1.0;
  for (size_t k = 40; k < 60; ++k) log.steps[k].esf_degenerate = true;
  const RunMetrics m = aggregate(log, 0.0);
  // 21 samples drop out: the 20 marked intervals plus the two boundary ones
  CHECK(m.E_sf < 1.0);
  CHECK(m.E_sf > 0.75);
  CHECK(m.max_e_sf == 1.0);
}

TEST_CASE("timing statistics summarise the control cost", "[metrics]") {
  RunLog log = synthetic_log(99, 1e-3);
  for (size_t k = 0; k < log.steps.size(); ++k)
    log.steps[k].control_us = static_cast<double>(k + 1);  // 1..100
  const RunMetrics m = aggregate(log, 0.0);
  CHECK(std::abs(m.mean_step_us - 50.5) < 1e-12);
  CHECK(m.p99_step_us == 99.0);
}

TEST_CASE("aggregation rejects degenerate logs", "[metrics]") {
  RunLog log;
  CHECK_THROWS_AS(aggregate(log, 0.2), Error);
  log = synthetic_log(0, 1e-3);
  CHECK_THROWS_AS(aggregate(log, 0.2), Error);
}
