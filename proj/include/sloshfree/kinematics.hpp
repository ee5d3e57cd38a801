#pragma once

#include "sloshfree/common.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sloshfree {

/// One joint row in Craig's modified Denavit-Hartenberg convention.  The
/// transform from frame i-1 to frame i is
///
///   T_i = RotX(alpha) * TransX(a) * RotZ(theta_offset + q_i) * TransZ(d)
///
/// so `a`/`alpha` describe the link *preceding* the joint axis.
struct DhRow {
  double a = 0.0;             // link length [m]
  double d = 0.0;             // link offset [m]
  double alpha = 0.0;         // link twist [rad]
  double theta_offset = 0.0;  // constant joint-angle offset [rad]
};

/// Symmetric-by-band joint-space limits.  Every band must satisfy
/// min < max elementwise; jerk limits bound the discrete difference of
/// consecutive acceleration commands.
struct Limits {
  VecX q_min, q_max;
  VecX qd_min, qd_max;
  VecX qdd_min, qdd_max;
  VecX qddd_min, qddd_max;

  void validate(Eigen::Index n) const {
    auto check_band = [n](const VecX& lo, const VecX& hi, const char* what) {
      if (lo.size() != n || hi.size() != n)
        throw Error(std::string("limit band '") + what + "' has wrong dimension");
      if (!lo.allFinite() || !hi.allFinite())
        throw Error(std::string("limit band '") + what + "' contains non-finite values");
      if (((hi - lo).array() <= 0.0).any())
        throw Error(std::string("invalid limit band '") + what + "': min must be < max");
    };
    check_band(q_min, q_max, "q");
    check_band(qd_min, qd_max, "qd");
    check_band(qdd_min, qdd_max, "qdd");
    check_band(qddd_min, qddd_max, "qddd");
  }

  bool contains(const VecX& q, const VecX& qd, const VecX& qdd, double tol) const {
    return (q.array() >= q_min.array() - tol).all() && (q.array() <= q_max.array() + tol).all() &&
           (qd.array() >= qd_min.array() - tol).all() && (qd.array() <= qd_max.array() + tol).all() &&
           (qdd.array() >= qdd_min.array() - tol).all() && (qdd.array() <= qdd_max.array() + tol).all();
  }
};

struct EePose {
  Vec3 p = Vec3::Zero();
  Mat3 R = Mat3::Identity();
};

/// Serial revolute-joint chain plus a fixed tool transform appended after the
/// last joint frame.  `fk_reference`, when present, records an independently
/// derived pose for one configuration and is used by the self-check command
/// to detect silent corruption of the kinematic parameters.
struct KinematicModel {
  std::string name;
  std::vector<DhRow> dh_rows;
  Mat4 tool_transform = Mat4::Identity();
  Limits limits;
  VecX q_home;  // preferred seed for inverse-kinematics setup (may be empty)
  std::optional<std::pair<VecX, EePose>> fk_reference;

  int n() const { return static_cast<int>(dh_rows.size()); }

  void validate() const {
    if (dh_rows.empty()) throw Error("model must have at least one joint");
    for (const DhRow& r : dh_rows)
      if (!std::isfinite(r.a) || !std::isfinite(r.d) || !std::isfinite(r.alpha) ||
          !std::isfinite(r.theta_offset))
        throw Error("model DH row contains non-finite values");
    if (!tool_transform.allFinite() ||
        (tool_transform.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-12 ||
        !is_rotation(tool_transform.topLeftCorner<3, 3>()))
      throw Error("invalid tool transform: rotation block must be orthonormal");
    limits.validate(n());
    if (q_home.size() != 0 && q_home.size() != n())
      throw Error("q_home has wrong dimension");
  }
};

struct JointState {
  VecX q, qd, qdd;
};

struct Twist {
  Vec3 v = Vec3::Zero();  // linear velocity [m/s]
  Vec3 w = Vec3::Zero();  // angular velocity [rad/s]
  Vec6 stacked() const {
    Vec6 out;
    out << v, w;
    return out;
  }
};

struct SpatialAccel {
  Vec3 a = Vec3::Zero();   // linear acceleration [m/s^2]
  Vec3 wd = Vec3::Zero();  // angular acceleration [rad/s^2]
  Vec6 stacked() const {
    Vec6 out;
    out << a, wd;
    return out;
  }
};

/// Homogeneous transform of one modified-DH row at joint angle q.
inline Mat4 dh_transform(const DhRow& row, double q) {
  const double ct = std::cos(row.theta_offset + q);
  const double st = std::sin(row.theta_offset + q);
  const double ca = std::cos(row.alpha);
  const double sa = std::sin(row.alpha);
  Mat4 T;
  T << ct, -st, 0.0, row.a,
       st * ca, ct * ca, -sa, -row.d * sa,
       st * sa, ct * sa, ca, row.d * ca,
       0.0, 0.0, 0.0, 1.0;
  return T;
}

namespace detail {

/// World-frame joint axes and origins, plus the tool pose.  All Jacobian and
/// Hessian expressions below are built from this chain.
struct FrameChain {
  std::vector<Vec3> axis;    // z axis of joint i in world frame
  std::vector<Vec3> origin;  // origin of frame i in world frame
  EePose ee;
};

inline FrameChain frame_chain(const KinematicModel& model, const VecX& q) {
  const int n = model.n();
  if (q.size() != n) throw Error("joint vector has wrong dimension");
  if (!q.allFinite()) throw Error("joint vector contains non-finite values");
  FrameChain chain;
  chain.axis.reserve(n);
  chain.origin.reserve(n);
  Mat4 T = Mat4::Identity();
  for (int i = 0; i < n; ++i) {
    T = T * dh_transform(model.dh_rows[i], q(i));
    // RotZ/TransZ leave the frame's z axis on the joint axis, so frame i's
    // z column and origin identify the axis line of joint i in world frame.
    chain.axis.push_back(T.block<3, 1>(0, 2));
    chain.origin.push_back(T.block<3, 1>(0, 3));
  }
  T = T * model.tool_transform;
  chain.ee.p = T.block<3, 1>(0, 3);
  chain.ee.R = T.topLeftCorner<3, 3>();
  return chain;
}

}  // namespace detail

inline EePose forward_kinematics(const KinematicModel& model, const VecX& q) {
  return detail::frame_chain(model, q).ee;
}

/// Geometric Jacobian in world frame: column i is [z_i x (p_e - o_i); z_i].
inline Mat6X jacobian(const KinematicModel& model, const VecX& q) {
  const detail::FrameChain chain = detail::frame_chain(model, q);
  const int n = model.n();
  Mat6X J(6, n);
  for (int i = 0; i < n; ++i) {
    J.col(i).head<3>() = chain.axis[i].cross(chain.ee.p - chain.origin[i]);
    J.col(i).tail<3>() = chain.axis[i];
  }
  return J;
}

/// Kinematic Hessian as n slices of dJ/dq_i (each 6 x n).  For a serial
/// revolute chain the partials follow from the Jacobian columns alone:
///
///   d(Jv_j)/dq_i = Jw_min(i,j) x Jv_max(i,j)
///   d(Jw_j)/dq_i = Jw_i x Jw_j   for i <= j, zero otherwise
///
/// which this routine fills in directly (no finite differencing).
inline std::vector<Mat6X> hessian(const KinematicModel& model, const VecX& q) {
  const Mat6X J = jacobian(model, q);
  const int n = model.n();
  std::vector<Mat6X> H(n, Mat6X::Zero(6, n));
  for (int i = 0; i < n; ++i) {
    const Vec3 wi = J.col(i).tail<3>();
    for (int j = 0; j < n; ++j) {
      const Vec3 vj = J.col(j).head<3>();
      const Vec3 wj = J.col(j).tail<3>();
      if (i <= j) {
        H[i].col(j).head<3>() = wi.cross(vj);
        H[i].col(j).tail<3>() = wi.cross(wj);
      } else {
        H[i].col(j).head<3>() = wj.cross(J.col(i).head<3>());
      }
    }
  }
  return H;
}

/// Quadratic velocity term h = sum_i qd_i * (dJ/dq_i) * qd, i.e. Jdot * qd.
inline Vec6 velocity_product(const std::vector<Mat6X>& H, const VecX& qd) {
  Vec6 h = Vec6::Zero();
  for (size_t i = 0; i < H.size(); ++i) h += qd(static_cast<Eigen::Index>(i)) * (H[i] * qd);
  return h;
}

inline Twist ee_velocity(const KinematicModel& model, const VecX& q, const VecX& qd) {
  if (qd.size() != model.n()) throw Error("joint velocity has wrong dimension");
  const Vec6 tw = jacobian(model, q) * qd;
  return Twist{tw.head<3>(), tw.tail<3>()};
}

inline SpatialAccel ee_acceleration(const KinematicModel& model, const JointState& s) {
  if (s.qd.size() != model.n() || s.qdd.size() != model.n())
    throw Error("joint state has wrong dimension");
  const Vec6 acc = jacobian(model, s.q) * s.qdd + velocity_product(hessian(model, s.q), s.qd);
  return SpatialAccel{acc.head<3>(), acc.tail<3>()};
}

/// Everything the control loop needs at one configuration, computed from a
/// single chain traversal.
struct KinematicsEval {
  EePose pose;
  Mat6X J;
  std::vector<Mat6X> H;
};

inline KinematicsEval evaluate(const KinematicModel& model, const VecX& q) {
  KinematicsEval out;
  out.pose = forward_kinematics(model, q);
  out.J = jacobian(model, q);
  out.H = hessian(model, q);
  return out;
}

namespace detail {

inline VecX read_vector(const nlohmann::json& j, const char* key, Eigen::Index n) {
  if (!j.contains(key)) throw ParseError(std::string("model is missing field '") + key + "'");
  const auto& arr = j.at(key);
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != n)
    throw ParseError(std::string("field '") + key + "' must be an array of length " +
                     std::to_string(n));
  VecX out(n);
  for (Eigen::Index i = 0; i < n; ++i) out(i) = arr.at(i).get<double>();
  return out;
}

inline Mat3 read_matrix3(const nlohmann::json& arr, const char* key) {
  if (!arr.is_array() || arr.size() != 3)
    throw ParseError(std::string("field '") + key + "' must be a 3x3 array");
  Mat3 out;
  for (int r = 0; r < 3; ++r) {
    const auto& row = arr.at(r);
    if (!row.is_array() || row.size() != 3)
      throw ParseError(std::string("field '") + key + "' must be a 3x3 array");
    for (int c = 0; c < 3; ++c) out(r, c) = row.at(c).get<double>();
  }
  return out;
}

}  // namespace detail

/// Parse a kinematic model from JSON text (the *content* of a model file).
/// Throws ParseError on malformed text and Error on invalid parameters.
inline KinematicModel load_model(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model parse error: ") + e.what());
  }
  KinematicModel model;
  try {
    model.name = j.value("name", std::string{});
    if (!j.contains("joints") || !j.at("joints").is_array() || j.at("joints").empty())
      throw ParseError("model must provide a non-empty 'joints' array");
    for (const auto& row : j.at("joints")) {
      DhRow dh;
      dh.a = row.at("a").get<double>();
      dh.d = row.at("d").get<double>();
      dh.alpha = row.at("alpha").get<double>();
      dh.theta_offset = row.value("theta_offset", 0.0);
      model.dh_rows.push_back(dh);
    }
    const Eigen::Index n = model.n();
    if (j.contains("tool_transform")) {
      const auto& arr = j.at("tool_transform");
      if (!arr.is_array() || arr.size() != 4) throw ParseError("'tool_transform' must be 4x4");
      for (int r = 0; r < 4; ++r) {
        const auto& row = arr.at(r);
        if (!row.is_array() || row.size() != 4) throw ParseError("'tool_transform' must be 4x4");
        for (int c = 0; c < 4; ++c) model.tool_transform(r, c) = row.at(c).get<double>();
      }
    }
    const auto& lim = j.at("limits");
    model.limits.q_min = detail::read_vector(lim, "q_min", n);
    model.limits.q_max = detail::read_vector(lim, "q_max", n);
    model.limits.qd_min = detail::read_vector(lim, "qd_min", n);
    model.limits.qd_max = detail::read_vector(lim, "qd_max", n);
    model.limits.qdd_min = detail::read_vector(lim, "qdd_min", n);
    model.limits.qdd_max = detail::read_vector(lim, "qdd_max", n);
    model.limits.qddd_min = detail::read_vector(lim, "qddd_min", n);
    model.limits.qddd_max = detail::read_vector(lim, "qddd_max", n);
    if (j.contains("q_home")) model.q_home = detail::read_vector(j, "q_home", n);
    if (j.contains("fk_reference")) {
      const auto& ref = j.at("fk_reference");
      EePose pose;
      const VecX qref = detail::read_vector(ref, "q", n);
      pose.p = detail::read_vector(ref, "p", 3);
      pose.R = detail::read_matrix3(ref.at("R"), "fk_reference.R");
      model.fk_reference = std::make_pair(qref, pose);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model parse error: ") + e.what());
  }
  model.validate();
  return model;
}

}  // namespace sloshfree
