#include "sloshfree/flatness.hpp"

#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <random>

using namespace sloshfree;

TEST_CASE("lateral acceleration of one g tilts the container 45 degrees", "[flatness]") {
  FlatnessParams params;
  const Vec3 a_r(kGravity, 0.0, 0.0);
  const OrientationResult res = slosh_free_orientation(a_r, params);
  REQUIRE(res.flag == OrientationDegeneracy::none);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK((res.R.col(2) - Vec3(inv_sqrt2, 0.0, inv_sqrt2)).norm() < 1e-12);
  CHECK((res.R.col(1) - Vec3(0.0, 1.0, 0.0)).norm() < 1e-12);
  CHECK((res.R.col(0) - Vec3(inv_sqrt2, 0.0, -inv_sqrt2)).norm() < 1e-12);
  CHECK(is_rotation(res.R, 1e-12));
}

TEST_CASE("zero acceleration keeps the container upright", "[flatness]") {
  const OrientationResult res = slosh_free_orientation(Vec3::Zero(), FlatnessParams{});
  REQUIRE(res.flag == OrientationDegeneracy::none);
  CHECK((res.R - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("orientation aligns the up axis with the compensated acceleration", "[flatness]") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> acc(-20.0, 20.0);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  int checked = 0;
  while (checked < 1000) {
    FlatnessParams params;
    params.psi = angle(rng);
    const Vec3 a_r(acc(rng), acc(rng), acc(rng));
    const Vec3 f = a_r + params.g_comp;
    if (f.norm() < 0.1) continue;  // stay away from the free-fall pole
    const OrientationResult res = slosh_free_orientation(a_r, params);
    if (res.flag != OrientationDegeneracy::none) continue;
    ++checked;
    CHECK(is_rotation(res.R, 1e-12));
    // alignment: the angle between R e3 and f vanishes
    const double cross_norm = res.R.col(2).cross(f.normalized()).norm();
    CHECK(cross_norm < 1e-12);
    CHECK(res.R.col(2).dot(f) > 0.0);
    // heading convention: the y axis is orthogonal to the heading direction
    const Vec3 heading(std::cos(params.psi), std::sin(params.psi), 0.0);
    CHECK(std::abs(res.R.col(1).dot(heading)) < 1e-12);
  }
}

TEST_CASE("degenerate accelerations are flagged", "[flatness]") {
  FlatnessParams params;
  // free fall: compensated acceleration vanishes
  const OrientationResult ff = slosh_free_orientation(Vec3(0.0, 0.0, -kGravity), params);
  CHECK(ff.flag == OrientationDegeneracy::free_fall);
  // thrust axis parallel to the heading direction
  const OrientationResult gl = slosh_free_orientation(Vec3(5.0, 0.0, -kGravity), params);
  CHECK(gl.flag == OrientationDegeneracy::gimbal);
}

TEST_CASE("pose reference holds the last orientation on degeneracy", "[flatness]") {
  const Trajectory traj(LoopShape{}, 0.0, 4.0);
  FlatnessParams params;
  params.eps_acc = 1e9;  // force the degenerate branch on every sample
  const Mat3 held = rot_z(0.7);
  const PoseReference ref = slosh_free_reference(traj, 1.0, params, held);
  CHECK(ref.flag == OrientationDegeneracy::free_fall);
  CHECK((ref.R - held).cwiseAbs().maxCoeff() == 0.0);

  // healthy parameters: orientation comes from the flatness map
  const PoseReference ok = slosh_free_reference(traj, 1.0, FlatnessParams{}, held);
  CHECK(ok.flag == OrientationDegeneracy::none);
  const Vec3 f = ok.ref.a + default_gravity_comp();
  CHECK(ok.R.col(2).cross(f.normalized()).norm() < 1e-12);
}

TEST_CASE("upright reference pins the identity orientation", "[flatness]") {
  const Trajectory traj(LissajousShape{}, 0.0, 4.0);
  for (double t : {0.0, 1.3, 2.9, 4.0}) {
    const PoseReference ref = upright_reference(traj, t);
    CHECK((ref.R - Mat3::Identity()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ref.flag == OrientationDegeneracy::none);
    CHECK((ref.ref.p - traj.sample(t).p).norm() == 0.0);
  }
}
