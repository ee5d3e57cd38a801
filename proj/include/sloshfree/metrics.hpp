#pragma once

#include "sloshfree/common.hpp"
#include "sloshfree/kinematics.hpp"
#include "sloshfree/rac.hpp"

#include <algorithm>
#include <vector>

namespace sloshfree {

inline double position_error(const Vec3& p_r, const Vec3& p_e) { return (p_r - p_e).norm(); }

struct SloshAngle {
  double angle = 0.0;    // [rad], in [0, pi]
  bool degenerate = false;  // compensated acceleration too small to define it
};

/// Angle between the compensated end-effector acceleration and the container
/// up axis (third column of R_e).  Decomposing a_g = a_e + g_comp into the
/// component along the up axis and the orthogonal rest gives
/// tan(e_sf) = |horizontal| / vertical, evaluated with atan2 so the angle is
/// well-defined in [0, pi] even when the vertical part is negative.
inline SloshAngle slosh_free_angle(const Vec3& a_e, const Mat3& R_e, const Vec3& g_comp,
                                   double eps_acc = 1e-3) {
  SloshAngle out;
  const Vec3 a_g = a_e + g_comp;
  if (a_g.norm() < eps_acc) {
    out.degenerate = true;
    return out;
  }
  const Vec3 up = R_e.col(2);
  const double vertical = up.dot(a_g);
  const Vec3 horizontal = a_g - vertical * up;
  out.angle = std::atan2(horizontal.norm(), vertical);
  return out;
}

/// One control step of a closed-loop run.
struct StepRecord {
  double t = 0.0;
  JointState state;           // joint state the controller saw at t
  EePose ee;                  // end-effector pose at t
  Twist twist;                // end-effector twist at t
  SpatialAccel accel;         // executed task acceleration over [t, t+dt]
  Vec3 p_ref = Vec3::Zero();  // reference position
  Mat3 R_ref = Mat3::Identity();
  Vec6 command = Vec6::Zero();  // commanded task acceleration u_T
  Vec6 slack = Vec6::Zero();
  double e_p = 0.0;
  double e_sf = 0.0;   // [rad]
  bool ref_degenerate = false;  // orientation reference held (flatness degeneracy)
  bool esf_degenerate = false;  // slosh angle undefined at this step
  double control_us = 0.0;      // wall-clock cost of this control step
};

struct RunLog {
  double dt = 0.0;
  std::vector<StepRecord> steps;
};

struct RunMetrics {
  double E_p = 0.0;       // integral of position error [m*s]
  double E_sf = 0.0;      // integral of slosh angle [rad*s]
  double max_e_sf = 0.0;  // peak slosh angle after the transient [rad]
  double Sl = 0.0;        // integrated norm-1 slack activity [.. *s]
  bool infeasible = false;  // any step needed slack beyond the tolerance
  double mean_step_us = 0.0;
  double p99_step_us = 0.0;
};

/// Trapezoid-rule aggregation of a run log.  The max slosh angle ignores the
/// initial transient (the controller needs a moment to converge onto the
/// reference accelerations); the slack integral applies the same activation
/// tolerance used for the feasibility flag, so solver-noise-level slack does
/// not register as activity.
inline RunMetrics aggregate(const RunLog& log, double transient = 0.2,
                            double slack_tol = kSlackTol) {
  RunMetrics m;
  const size_t n = log.steps.size();
  if (n < 2) throw Error("metrics: run log must contain at least two steps");
  auto slack_activity = [&](const Vec6& d) {
    double sum = 0.0;
    for (int i = 0; i < 6; ++i)
      if (std::abs(d(i)) >= slack_tol) sum += std::abs(d(i));
    return sum;
  };
  std::vector<double> costs;
  costs.reserve(n);
  for (size_t k = 0; k + 1 < n; ++k) {
    const StepRecord& a = log.steps[k];
    const StepRecord& b = log.steps[k + 1];
    const double h = b.t - a.t;
    m.E_p += 0.5 * h * (a.e_p + b.e_p);
    if (!a.esf_degenerate && !b.esf_degenerate) m.E_sf += 0.5 * h * (a.e_sf + b.e_sf);
    m.Sl += 0.5 * h * (slack_activity(a.slack) + slack_activity(b.slack));
  }
  for (const StepRecord& s : log.steps) {
    if (s.t >= transient && !s.esf_degenerate) m.max_e_sf = std::max(m.max_e_sf, s.e_sf);
    if (s.slack.cwiseAbs().maxCoeff() >= slack_tol) m.infeasible = true;
    costs.push_back(s.control_us);
  }
  if (!costs.empty()) {
    double sum = 0.0;
    for (double c : costs) sum += c;
    m.mean_step_us = sum / static_cast<double>(costs.size());
    std::vector<double> sorted = costs;
    std::sort(sorted.begin(), sorted.end());
    const size_t idx = static_cast<size_t>(0.99 * static_cast<double>(sorted.size() - 1));
    m.p99_step_us = sorted[idx];
  }
  return m;
}

}  // namespace sloshfree
