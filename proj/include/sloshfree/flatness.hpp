#pragma once

#include "sloshfree/common.hpp"
#include "sloshfree/trajectory.hpp"

namespace sloshfree {

enum class OrientationDegeneracy {
  none,
  free_fall,  // compensated acceleration vanished: attitude undefined
  gimbal,     // thrust axis parallel to the heading direction
};

struct FlatnessParams {
  double psi = 0.0;                    // heading angle about the thrust axis [rad]
  Vec3 g_comp = default_gravity_comp();
  double eps_acc = 1e-3;               // min norm of compensated acceleration [m/s^2]
  double eps_cross = 1e-6;             // min norm of the heading cross product
};

struct OrientationResult {
  Mat3 R = Mat3::Identity();
  OrientationDegeneracy flag = OrientationDegeneracy::none;
};

/// Orientation that keeps the container surface normal to the compensated
/// acceleration, borrowed from the differential-flatness attitude map of
/// thrust-vectored vehicles: the body z axis tracks a_r + g_comp and the
/// remaining freedom is fixed by the heading angle psi.  Returns an identity
/// rotation plus a flag when the map degenerates; callers decide the fallback.
inline OrientationResult slosh_free_orientation(const Vec3& a_r, const FlatnessParams& params) {
  OrientationResult out;
  const Vec3 f = a_r + params.g_comp;
  const double fn = f.norm();
  if (fn < params.eps_acc) {
    out.flag = OrientationDegeneracy::free_fall;
    return out;
  }
  const Vec3 z_r = f / fn;
  const Vec3 heading(std::cos(params.psi), std::sin(params.psi), 0.0);
  const Vec3 y_raw = z_r.cross(heading);
  const double yn = y_raw.norm();
  if (yn < params.eps_cross) {
    out.flag = OrientationDegeneracy::gimbal;
    return out;
  }
  const Vec3 y_r = y_raw / yn;
  const Vec3 x_r = y_r.cross(z_r);
  out.R.col(0) = x_r;
  out.R.col(1) = y_r;
  out.R.col(2) = z_r;
  return out;
}

/// Full pose reference: position from the trajectory, orientation from the
/// slosh-free map.
struct PoseReference {
  ReferenceSample ref;
  Mat3 R = Mat3::Identity();
  OrientationDegeneracy flag = OrientationDegeneracy::none;
};

/// Sample the slosh-free pose reference at time t.  On a degenerate
/// orientation the previous orientation is held and the flag reports why.
inline PoseReference slosh_free_reference(const Trajectory& traj, double t,
                                          const FlatnessParams& params,
                                          const Mat3& previous_R) {
  PoseReference out;
  out.ref = traj.sample(t);
  const OrientationResult orient = slosh_free_orientation(out.ref.a, params);
  out.flag = orient.flag;
  out.R = (orient.flag == OrientationDegeneracy::none) ? orient.R : previous_R;
  return out;
}

/// Baseline reference used by ablation runs: same position trajectory, but
/// the orientation is pinned to the upright attitude for the whole run.
inline PoseReference upright_reference(const Trajectory& traj, double t) {
  PoseReference out;
  out.ref = traj.sample(t);
  out.R = Mat3::Identity();
  return out;
}

}  // namespace sloshfree
