#include "sloshfree/task_control.hpp"

#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

using namespace sloshfree;

TEST_CASE("rotation log and exp round-trip across the angle range", "[task_control]") {
  std::mt19937 rng(31);
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> angles(1e-9, std::numbers::pi - 1e-3);
  for (int i = 0; i < 1000; ++i) {
    Vec3 axis(g(rng), g(rng), g(rng));
    axis.normalize();
    const double theta = angles(rng);
    const Mat3 R = rotation_exp(theta * axis);
    const Vec3 w = rotation_log(R);
    CHECK(std::abs(w.norm() - theta) < 1e-9);
    CHECK((rotation_exp(w) - R).cwiseAbs().maxCoeff() < 1e-9);
  }
  CHECK(rotation_log(Mat3::Identity()).norm() == 0.0);
}

TEST_CASE("rotation log is robust near and at pi", "[task_control]") {
  std::mt19937 rng(37);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Vec3 axis(g(rng), g(rng), g(rng));
    axis.normalize();
    for (double theta : {std::numbers::pi - 1e-5, std::numbers::pi - 1e-8, std::numbers::pi}) {
      const Mat3 R = rotation_exp(theta * axis);
      const Vec3 w = rotation_log(R);
      CHECK((rotation_exp(w) - R).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
  // the two representations of a pi rotation map to one canonical vector
  const Vec3 axis = Vec3(1.0, -2.0, 0.5).normalized();
  const Mat3 R1 = rotation_exp(std::numbers::pi * axis);
  const Mat3 R2 = rotation_exp(-std::numbers::pi * axis);
  const Vec3 w1 = rotation_log(R1);
  const Vec3 w2 = rotation_log(R2);
  CHECK((w1 - w2).norm() < 1e-9);
  const Vec3 canonical = w1 / w1.norm();
  CHECK(std::lexicographical_compare(canonical.data(), canonical.data() + 3,
                                     (-canonical).eval().data(),
                                     (-canonical).eval().data() + 3) == false);
}

TEST_CASE("orientation error rotates the end effector onto the reference", "[task_control]") {
  std::mt19937 rng(41);
  for (int i = 0; i < 200; ++i) {
    const Mat3 R_e = testutil::random_rotation(rng);
    const Mat3 R_r = testutil::random_rotation(rng);
    const Vec3 e = orientation_error(R_r, R_e);
    // applying the world-frame correction to R_e must reproduce R_r
    CHECK((rotation_exp(e) * R_e - R_r).cwiseAbs().maxCoeff() < 1e-9);
  }
  const Mat3 R = testutil::random_rotation(rng);
  CHECK(orientation_error(R, R).norm() < 1e-12);
}

TEST_CASE("pose error stacks position and orientation parts", "[task_control]") {
  EePose ee;
  ee.p = Vec3(0.1, -0.2, 0.3);
  ee.R = rot_z(0.5);
  const Vec3 p_r(0.4, 0.1, 0.2);
  const Vec6 e = pose_error(p_r, ee.R, ee);
  CHECK((e.head<3>() - (p_r - ee.p)).norm() == 0.0);
  CHECK(e.tail<3>().norm() < 1e-12);  // same orientation: no angular error

  const Vec6 e2 = pose_error(ee.p, rot_z(0.9), ee);
  CHECK(e2.head<3>().norm() == 0.0);
  CHECK((e2.tail<3>() - Vec3(0.0, 0.0, 0.4)).norm() < 1e-12);
}

TEST_CASE("cascaded loops scale error and damp velocity", "[task_control]") {
  const TaskGains gains;  // defaults: outer 10, inner 100
  Twist rest;
  const Vec6 e = Vec6::Ones();
  CHECK((cascaded_pd(e, rest, gains) - Vec6::Constant(1000.0)).cwiseAbs().maxCoeff() == 0.0);

  Twist moving;
  moving.v = Vec3(1.0, 0.0, 0.0);
  const Vec6 u = cascaded_pd(Vec6::Zero(), moving, gains);
  CHECK(u(0) == -100.0);
  CHECK(u.tail<5>().norm() == 0.0);

  TaskGains custom;
  custom.k_task << 1, 2, 3, 4, 5, 6;
  custom.k_vel << 10, 10, 10, 20, 20, 20;
  const Vec6 u2 = cascaded_pd(Vec6::Ones(), rest, custom);
  Vec6 expect;
  expect << 10, 20, 30, 80, 100, 120;
  CHECK((u2 - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gain validation rejects non-positive entries", "[task_control]") {
  TaskGains gains;
  gains.k_task(2) = 0.0;
  CHECK_THROWS_AS(gains.validate(), Error);
  gains = TaskGains{};
  gains.k_vel(5) = -1.0;
  CHECK_THROWS_AS(gains.validate(), Error);
  CHECK_NOTHROW(TaskGains{}.validate());
}
