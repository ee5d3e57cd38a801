#pragma once

#include "sloshfree/common.hpp"
#include "sloshfree/kinematics.hpp"

#include <algorithm>
#include <numbers>

namespace sloshfree {

/// Rotation matrix from an angle-axis vector (Rodrigues).
inline Mat3 rotation_exp(const Vec3& w) {
  const double theta = w.norm();
  if (theta < 1e-12) return Mat3::Identity() + skew(w);
  return Eigen::AngleAxisd(theta, w / theta).toRotationMatrix();
}

/// Angle-axis vector of a rotation matrix, robust at both ends of the angle
/// range.  Near pi the axis comes from the dominant column of
/// R + R^T + (1 - trace R) I, which equals 2 (1 - cos theta) axis axis^T
/// exactly, and the angle from the off-diagonal norm (asin is
/// well-conditioned there, acos is not); the sign ambiguity of the pi
/// rotation is resolved by picking the lexicographically larger of the two
/// opposite axes.
inline Vec3 rotation_log(const Mat3& R) {
  const double c = std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(c);
  Vec3 v(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));  // = 2 sin(theta) * axis
  if (theta < 1e-8) return 0.5 * v;  // exact to O(theta^3)
  if (theta < std::numbers::pi - 1e-4) return (theta / (2.0 * std::sin(theta))) * v;
  const Mat3 A = R + R.transpose() + (1.0 - R.trace()) * Mat3::Identity();
  Eigen::Index k;
  A.colwise().squaredNorm().maxCoeff(&k);
  Vec3 axis = A.col(k).normalized();
  const double sin_theta = 0.5 * v.norm();
  const double angle = std::numbers::pi - std::asin(std::clamp(sin_theta, 0.0, 1.0));
  if (angle < std::numbers::pi - 1e-12) {
    // still a determinate direction: keep the sign indicated by v
    if (axis.dot(v) < 0.0) axis = -axis;
  } else {
    const Vec3 neg = -axis;
    if (std::lexicographical_compare(axis.data(), axis.data() + 3, neg.data(), neg.data() + 3))
      axis = neg;
  }
  return angle * axis;
}

/// World-frame orientation error e_R = R_e * log(R_e^T R_r): the angle-axis
/// step, expressed in world coordinates, that rotates the end-effector
/// orientation onto the reference.
inline Vec3 orientation_error(const Mat3& R_r, const Mat3& R_e) {
  return R_e * rotation_log(R_e.transpose() * R_r);
}

/// Stacked task-space pose error [position; orientation].
inline Vec6 pose_error(const Vec3& p_r, const Mat3& R_r, const EePose& ee) {
  Vec6 e;
  e.head<3>() = p_r - ee.p;
  e.tail<3>() = orientation_error(R_r, ee.R);
  return e;
}

/// Gains of the cascaded proportional loops.  The outer loop turns pose error
/// into a velocity reference, the inner loop turns velocity error into a
/// commanded task-space acceleration.
struct TaskGains {
  Vec6 k_task = Vec6::Constant(10.0);
  Vec6 k_vel = Vec6::Constant(100.0);

  void validate() const {
    if (!(k_task.array() > 0.0).all() || !(k_vel.array() > 0.0).all())
      throw Error("task gains must be strictly positive");
    if (!k_task.allFinite() || !k_vel.allFinite())
      throw Error("task gains must be finite");
  }
};

/// u_T = k_vel .* (k_task .* e_T - nu_e), the commanded task acceleration.
inline Vec6 cascaded_pd(const Vec6& e_task, const Twist& nu_e, const TaskGains& gains) {
  const Vec6 nu_ref = gains.k_task.cwiseProduct(e_task);
  return gains.k_vel.cwiseProduct(nu_ref - nu_e.stacked());
}

}  // namespace sloshfree
