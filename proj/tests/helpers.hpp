#pragma once

// Shared helpers for the test suite: repo paths, independent finite
// difference and enumeration oracles, and random-input generators.  The
// oracles here deliberately use the dumbest formulation available (elementary
// transforms, central differences, exhaustive subset enumeration) so they
// share no code path with the implementations they check.

#include "sloshfree/kinematics.hpp"
#include "sloshfree/qp.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testutil {

using namespace sloshfree;

inline std::filesystem::path repo_dir() { return SLOSHFREE_REPO_DIR; }

inline std::filesystem::path model_path() { return repo_dir() / "models" / "panda.json"; }

// ---------------------------------------------------------------------------
// Elementary-transform forward kinematics: composes RotX, TransX, RotZ,
// TransZ as four separate matrices per joint rather than one fused DH block.

inline Mat4 elem_rot_x(double t) {
  Mat4 T = Mat4::Identity();
  T.topLeftCorner<3, 3>() = rot_x(t);
  return T;
}

inline Mat4 elem_rot_z(double t) {
  Mat4 T = Mat4::Identity();
  T.topLeftCorner<3, 3>() = rot_z(t);
  return T;
}

inline Mat4 elem_trans(double x, double y, double z) {
  Mat4 T = Mat4::Identity();
  T(0, 3) = x;
  T(1, 3) = y;
  T(2, 3) = z;
  return T;
}

inline EePose oracle_fk(const KinematicModel& m, const VecX& q) {
  Mat4 T = Mat4::Identity();
  for (int i = 0; i < m.n(); ++i) {
    const DhRow& r = m.dh_rows[static_cast<size_t>(i)];
    T = T * elem_rot_x(r.alpha) * elem_trans(r.a, 0, 0) * elem_rot_z(r.theta_offset + q(i)) *
        elem_trans(0, 0, r.d);
  }
  T = T * m.tool_transform;
  return EePose{T.block<3, 1>(0, 3), T.topLeftCorner<3, 3>()};
}

// ---------------------------------------------------------------------------
// Central finite differences.

inline Mat6X fd_jacobian(const KinematicModel& m, const VecX& q, double h = 1e-6) {
  Mat6X J(6, m.n());
  const EePose p0 = forward_kinematics(m, q);
  for (int i = 0; i < m.n(); ++i) {
    VecX qp = q, qm = q;
    qp(i) += h;
    qm(i) -= h;
    const EePose fp = forward_kinematics(m, qp);
    const EePose fm = forward_kinematics(m, qm);
    J.col(i).head<3>() = (fp.p - fm.p) / (2.0 * h);
    const Mat3 W = ((fp.R - fm.R) / (2.0 * h)) * p0.R.transpose();
    J.col(i).tail<3>() = 0.5 * Vec3(W(2, 1) - W(1, 2), W(0, 2) - W(2, 0), W(1, 0) - W(0, 1));
  }
  return J;
}

inline std::vector<Mat6X> fd_hessian(const KinematicModel& m, const VecX& q, double h = 1e-6) {
  std::vector<Mat6X> H;
  H.reserve(static_cast<size_t>(m.n()));
  for (int i = 0; i < m.n(); ++i) {
    VecX qp = q, qm = q;
    qp(i) += h;
    qm(i) -= h;
    H.push_back((jacobian(m, qp) - jacobian(m, qm)) / (2.0 * h));
  }
  return H;
}

// ---------------------------------------------------------------------------
// Exhaustive QP oracle: solve every active-set combination as an equality
// constrained KKT system, keep the primal-feasible candidates, and return the
// smallest objective.  For a strictly convex QP the feasible minimum over all
// candidate sets equals the global optimum.

inline double enumerate_qp_min(const QpProblem& p, double feas_tol = 1e-8) {
  const Eigen::Index d = p.dim();
  const int me = static_cast<int>(p.n_eq());
  const int mi = static_cast<int>(p.n_in());
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << mi); ++mask) {
    std::vector<int> rows;
    for (int k = 0; k < mi; ++k)
      if (mask & (1u << k)) rows.push_back(k);
    const Eigen::Index m = me + static_cast<Eigen::Index>(rows.size());
    if (m > d) continue;
    MatX A(m, d);
    VecX b(m);
    if (me > 0) {
      A.topRows(me) = p.A_eq;
      b.head(me) = p.b_eq;
    }
    for (size_t r = 0; r < rows.size(); ++r) {
      A.row(me + static_cast<Eigen::Index>(r)) = p.A_in.row(rows[r]);
      b(me + static_cast<Eigen::Index>(r)) = p.b_in(rows[r]);
    }
    MatX K = MatX::Zero(d + m, d + m);
    K.topLeftCorner(d, d) = p.P;
    if (m > 0) {
      K.topRightCorner(d, m) = A.transpose();
      K.bottomLeftCorner(m, d) = A;
    }
    VecX rhs(d + m);
    rhs.head(d) = -p.lin;
    rhs.tail(m) = b;
    Eigen::FullPivLU<MatX> lu(K);
    if (!lu.isInvertible()) continue;
    const VecX sol = lu.solve(rhs);
    const VecX x = sol.head(d);
    bool feasible = true;
    if (mi > 0) feasible = ((p.A_in * x - p.b_in).array() >= -feas_tol).all();
    if (!feasible) continue;
    best = std::min(best, 0.5 * x.dot(p.P * x) + p.lin.dot(x));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Random inputs.

inline VecX random_config(const KinematicModel& m, std::mt19937& rng) {
  VecX q(m.n());
  for (int i = 0; i < m.n(); ++i) {
    std::uniform_real_distribution<double> dist(m.limits.q_min(i), m.limits.q_max(i));
    q(i) = dist(rng);
  }
  return q;
}

inline Mat3 random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  while (q.norm() < 1e-6) q = Eigen::Quaterniond(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// Random strictly convex QP with guaranteed-feasible constraints (a known
/// interior point defines the right-hand sides).
inline QpProblem random_feasible_qp(std::mt19937& rng, int d, int me, int mi) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto rnd = [&](Eigen::Index r, Eigen::Index c) {
    return MatX::NullaryExpr(r, c, [&](Eigen::Index, Eigen::Index) { return unit(rng); });
  };
  QpProblem p;
  const MatX M = rnd(d, d);
  p.P = M * M.transpose() + 0.5 * MatX::Identity(d, d);
  p.lin = rnd(d, 1);
  const VecX x0 = rnd(d, 1);
  p.A_eq = rnd(me, d);
  p.b_eq = me > 0 ? VecX(p.A_eq * x0) : VecX(0);
  p.A_in = rnd(mi, d);
  std::uniform_real_distribution<double> margin(0.05, 0.5);
  VecX slack(mi);
  for (int i = 0; i < mi; ++i) slack(i) = margin(rng);
  p.b_in = p.A_in * x0 - slack;
  return p;
}

}  // namespace testutil
