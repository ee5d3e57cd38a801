#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>

namespace sloshfree {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Mat6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Base class of every exception thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input text (model files, configs).
struct ParseError : Error {
  using Error::Error;
};

inline constexpr double kGravity = 9.81;  // m/s^2

/// Upward gravity-compensation vector: a container at rest must experience a
/// resultant specific acceleration of +g along world z, so the compensation
/// term added to the end-effector acceleration points up.
inline Vec3 default_gravity_comp() { return {0.0, 0.0, kGravity}; }

inline bool is_rotation(const Mat3& R, double tol = 1e-9) {
  const Mat3 err = R.transpose() * R - Mat3::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

inline Mat3 rot_x(double t) { return Eigen::AngleAxisd(t, Vec3::UnitX()).toRotationMatrix(); }
inline Mat3 rot_y(double t) { return Eigen::AngleAxisd(t, Vec3::UnitY()).toRotationMatrix(); }
inline Mat3 rot_z(double t) { return Eigen::AngleAxisd(t, Vec3::UnitZ()).toRotationMatrix(); }

inline Mat3 skew(const Vec3& w) {
  Mat3 S;
  S << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
      -w.y(), w.x(), 0.0;
  return S;
}

}  // namespace sloshfree
