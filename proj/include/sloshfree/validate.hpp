#pragma once

#include "sloshfree/common.hpp"
#include "sloshfree/kinematics.hpp"
#include "sloshfree/qp.hpp"

#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace sloshfree {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline VecX random_configuration(const KinematicModel& m, std::mt19937& rng) {
  VecX q(m.n());
  for (int i = 0; i < m.n(); ++i) {
    std::uniform_real_distribution<double> dist(m.limits.q_min(i), m.limits.q_max(i));
    q(i) = dist(rng);
  }
  return q;
}

/// Central-difference Jacobian of the forward kinematics: position rows from
/// the position difference, orientation rows from the skew part of dR R^T.
inline Mat6X fd_jacobian(const KinematicModel& m, const VecX& q, double h = 1e-6) {
  Mat6X J(6, m.n());
  for (int i = 0; i < m.n(); ++i) {
    VecX qp = q, qm = q;
    qp(i) += h;
    qm(i) -= h;
    const EePose fp = forward_kinematics(m, qp);
    const EePose fm = forward_kinematics(m, qm);
    J.col(i).head<3>() = (fp.p - fm.p) / (2.0 * h);
    const Mat3 dR = (fp.R - fm.R) / (2.0 * h);
    const Mat3 W = dR * forward_kinematics(m, q).R.transpose();
    J.col(i).tail<3>() = Vec3(W(2, 1) - W(1, 2), W(0, 2) - W(2, 0), W(1, 0) - W(0, 1)) * 0.5;
  }
  return J;
}

}  // namespace detail

/// Numerical self-checks of one loaded model plus the QP solver, reported as
/// a pass/fail table.  Deterministic: fixed seed, fixed sample counts.
inline std::vector<CheckResult> run_self_checks(const KinematicModel& model) {
  std::vector<CheckResult> results;
  std::mt19937 rng(12345);
  auto push = [&](const std::string& name, bool pass, const std::string& detail) {
    results.push_back({name, pass, detail});
  };

  // Recorded reference pose: catches silent corruption of the kinematic
  // parameters, which per-model finite differencing cannot see.
  if (model.fk_reference) {
    const auto& [qref, pose_ref] = *model.fk_reference;
    const EePose pose = forward_kinematics(model, qref);
    const double dp = (pose.p - pose_ref.p).norm();
    const double dR = (pose.R - pose_ref.R).cwiseAbs().maxCoeff();
    std::ostringstream os;
    os << "position deviation " << dp << " m, rotation deviation " << dR;
    push("fk_reference", dp < 1e-9 && dR < 1e-9, os.str());
  } else {
    push("fk_reference", true, "no reference pose recorded; skipped");
  }

  {
    double worst = 0.0;
    for (int s = 0; s < 50; ++s) {
      const EePose pose = forward_kinematics(model, detail::random_configuration(model, rng));
      const Mat3 err = pose.R.transpose() * pose.R - Mat3::Identity();
      worst = std::max(worst, err.cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(pose.R.determinant() - 1.0));
    }
    std::ostringstream os;
    os << "max orthonormality deviation " << worst;
    push("fk_orthonormality", worst < 1e-12, os.str());
  }

  {
    double worst = 0.0;
    for (int s = 0; s < 25; ++s) {
      const VecX q = detail::random_configuration(model, rng);
      const Mat6X J = jacobian(model, q);
      const Mat6X Jfd = detail::fd_jacobian(model, q);
      const double scale = std::max(1.0, J.cwiseAbs().maxCoeff());
      worst = std::max(worst, (J - Jfd).cwiseAbs().maxCoeff() / scale);
    }
    std::ostringstream os;
    os << "max relative deviation " << worst;
    push("jacobian_fd", worst < 1e-5, os.str());
  }

  {
    const double h = 1e-6;
    double worst = 0.0;
    for (int s = 0; s < 10; ++s) {
      const VecX q = detail::random_configuration(model, rng);
      const auto H = hessian(model, q);
      for (int i = 0; i < model.n(); ++i) {
        VecX qp = q, qm = q;
        qp(i) += h;
        qm(i) -= h;
        const Mat6X dJ = (jacobian(model, qp) - jacobian(model, qm)) / (2.0 * h);
        const double scale = std::max(1.0, dJ.cwiseAbs().maxCoeff());
        worst = std::max(worst, (H[static_cast<size_t>(i)] - dJ).cwiseAbs().maxCoeff() / scale);
      }
    }
    std::ostringstream os;
    os << "max relative deviation " << worst;
    push("hessian_fd", worst < 1e-4, os.str());
  }

  {
    // d/dt of the end-effector velocity along a joint-space quadratic must
    // match the analytic acceleration J qdd + Jdot qd.
    const double h = 1e-6;
    double worst = 0.0;
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int s = 0; s < 10; ++s) {
      JointState st;
      st.q = detail::random_configuration(model, rng);
      st.qd = VecX::NullaryExpr(model.n(), [&](Eigen::Index) { return unit(rng); });
      st.qdd = VecX::NullaryExpr(model.n(), [&](Eigen::Index) { return unit(rng); });
      const SpatialAccel acc = ee_acceleration(model, st);
      const VecX qp = st.q + h * st.qd + 0.5 * h * h * st.qdd;
      const VecX qm = st.q - h * st.qd + 0.5 * h * h * st.qdd;
      const Vec6 vp = jacobian(model, qp) * (st.qd + h * st.qdd);
      const Vec6 vm = jacobian(model, qm) * (st.qd - h * st.qdd);
      const Vec6 fd = (vp - vm) / (2.0 * h);
      worst = std::max(worst, (acc.stacked() - fd).cwiseAbs().maxCoeff());
    }
    std::ostringstream os;
    os << "max deviation " << worst;
    push("acceleration_fd", worst < 1e-4, os.str());
  }

  {
    // Small random strictly convex QPs must satisfy their own KKT system.
    GoldfarbIdnani solver;
    double worst = 0.0;
    bool all_ok = true;
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int s = 0; s < 25; ++s) {
      const int d = 3 + s % 4;
      MatX M = MatX::NullaryExpr(d, d, [&](Eigen::Index, Eigen::Index) { return unit(rng); });
      QpProblem p;
      p.P = M * M.transpose() + MatX::Identity(d, d);
      p.lin = VecX::NullaryExpr(d, [&](Eigen::Index) { return unit(rng); });
      const int mi = 2 + s % 5;
      p.A_in = MatX::NullaryExpr(mi, d, [&](Eigen::Index, Eigen::Index) { return unit(rng); });
      const VecX x0 = VecX::NullaryExpr(d, [&](Eigen::Index) { return unit(rng); });
      p.b_in = p.A_in * x0 - VecX::Constant(mi, 0.1);  // x0 strictly feasible
      p.A_eq = MatX(0, d);
      p.b_eq = VecX(0);
      try {
        const QpSolution sol = solver.solve(p);
        worst = std::max(worst, kkt_residuals(p, sol.x, sol.mult_eq, sol.mult_in).worst());
      } catch (const Error&) {
        all_ok = false;
      }
    }
    std::ostringstream os;
    os << "max KKT residual " << worst;
    push("qp_kkt", all_ok && worst < 1e-8, os.str());
  }

  return results;
}

}  // namespace sloshfree
