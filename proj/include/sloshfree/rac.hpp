#pragma once

#include "sloshfree/common.hpp"
#include "sloshfree/kinematics.hpp"
#include "sloshfree/qp.hpp"
#include "sloshfree/task_control.hpp"

#include <span>
#include <vector>

namespace sloshfree {

/// Diagonal weights of the resolved-acceleration QP cost.  The defaults keep
/// joint positions and accelerations almost free, damp joint velocities, and
/// price the slack on the task-acceleration equality heavily so it only
/// activates when the hard joint limits make the task infeasible.
struct RacWeights {
  VecX w_q;
  VecX w_qd;
  VecX w_qdd;
  Vec6 w_slack = Vec6::Constant(1e3);

  static RacWeights defaults(int n) {
    RacWeights w;
    w.w_q = VecX::Constant(n, 1e-8);
    w.w_qd = VecX::Constant(n, 1.0);
    w.w_qdd = VecX::Constant(n, 1e-8);
    return w;
  }

  void validate(int n) const {
    if (w_q.size() != n || w_qd.size() != n || w_qdd.size() != n)
      throw Error("qp weights have wrong dimension");
    if (!(w_q.array() > 0.0).all() || !(w_qd.array() > 0.0).all() ||
        !(w_qdd.array() > 0.0).all() || !(w_slack.array() > 0.0).all())
      throw Error("qp weights must be strictly positive");
  }
};

inline constexpr double kSlackTol = 1e-3;  // |delta| below this counts as inactive

struct JointCommand {
  VecX q, qd, qdd;
  Vec6 slack = Vec6::Zero();
  bool feasible_without_slack = true;
};

/// Resolved-acceleration QP over one control interval dt.
///
/// Decision vector x = [ q (n) | qd (n) | qdd (n) | delta (6) ], d = 3n+6.
///
/// equalities:    q  - dt*qd          = q0
///                qd - dt*qdd         = qd0
///                J0*qdd - delta      = u_T - h0
///
/// so delta is the achieved-minus-commanded task acceleration
/// (J0*qdd + h0 = u_T + delta).
/// inequalities (A x >= b), 8n rows:
///                q   >=  q_min        -q   >= -q_max
///                qd  >=  qd_min       -qd  >= -qd_max
///                qdd >=  qdd_min      -qdd >= -qdd_max
///                qdd >=  qdd0 + dt*qddd_min
///               -qdd >= -(qdd0 + dt*qddd_max)
///
/// The slack enters the task equality so the commanded task acceleration is
/// realised exactly whenever the joint-space constraints allow it, and is
/// relaxed by the cheapest task-space violation otherwise.
///
/// The slack keeps the *task* satisfiable, but the joint-space rows alone can
/// still contradict each other: through the integration equalities every
/// bound is an interval on qdd, and the intersection of the four intervals
/// can be empty.  The canonical case is a joint that reaches its velocity
/// bound while still accelerating: the jerk band around qdd0 then demands the
/// velocity keep growing past its box.  A one-step controller cannot foresee
/// this, so the builder reconciles the bounds instead, widening only the
/// lowest-priority conflicting interval until the intersection is nonempty:
/// position and velocity boxes are safety limits and are never touched (they
/// cannot conflict with each other as long as zero velocity is admissible),
/// the acceleration box yields only to them (emergency braking), and the jerk
/// band yields to all of the above.  In the unsaturated regime every interval
/// already intersects and the bounds are exactly the datasheet values.
inline QpProblem build_rac_qp(const JointState& s0, const Vec6& u_task, const Mat6X& J0,
                              const Vec6& h0, const Limits& limits, const RacWeights& weights,
                              double dt) {
  const int n = static_cast<int>(s0.q.size());
  if (!(dt > 0.0)) throw Error("rac: control interval must be positive");
  if (s0.qd.size() != n || s0.qdd.size() != n || J0.cols() != n)
    throw Error("rac: inconsistent dimensions");
  const int d = 3 * n + 6;

  VecX acc_lo = limits.qdd_min, acc_hi = limits.qdd_max;
  VecX jerk_lo = s0.qdd + dt * limits.qddd_min, jerk_hi = s0.qdd + dt * limits.qddd_max;
  for (int i = 0; i < n; ++i) {
    // Feasible qdd interval implied by the position and velocity boxes via
    // q = q0 + dt*qd0 + dt^2*qdd and qd = qd0 + dt*qdd.
    const double safe_lo = std::max((limits.q_min[i] - s0.q[i] - dt * s0.qd[i]) / (dt * dt),
                                    (limits.qd_min[i] - s0.qd[i]) / dt);
    const double safe_hi = std::min((limits.q_max[i] - s0.q[i] - dt * s0.qd[i]) / (dt * dt),
                                    (limits.qd_max[i] - s0.qd[i]) / dt);
    if (safe_lo > safe_hi) continue;  // state beyond recovery; leave bounds as printed
    // A yielding bound slides a hair past the touch point (1e-6 rad/s^2 is
    // physically nothing) so rounding in the reconstructed interval endpoints
    // cannot leave a measure-zero intersection; the safety rows stay exact.
    constexpr double kSlide = 1e-6;
    // Acceleration box yields to the safety interval (emergency braking).
    if (acc_lo[i] > safe_hi) acc_lo[i] = safe_hi - kSlide;
    if (acc_hi[i] < safe_lo) acc_hi[i] = safe_lo + kSlide;
    // Jerk band yields to the intersection of safety interval and accel box.
    const double free_lo = std::max(safe_lo, acc_lo[i]);
    const double free_hi = std::min(safe_hi, acc_hi[i]);
    if (jerk_lo[i] > free_hi) jerk_lo[i] = free_hi - kSlide;
    if (jerk_hi[i] < free_lo) jerk_hi[i] = free_lo + kSlide;
  }

  QpProblem p;
  p.P = MatX::Zero(d, d);
  p.P.diagonal().segment(0, n) = weights.w_q;
  p.P.diagonal().segment(n, n) = weights.w_qd;
  p.P.diagonal().segment(2 * n, n) = weights.w_qdd;
  p.P.diagonal().segment(3 * n, 6) = weights.w_slack;
  p.lin = VecX::Zero(d);

  p.A_eq = MatX::Zero(2 * n + 6, d);
  p.b_eq = VecX::Zero(2 * n + 6);
  p.A_eq.block(0, 0, n, n).setIdentity();
  p.A_eq.block(0, n, n, n) = -dt * MatX::Identity(n, n);
  p.b_eq.segment(0, n) = s0.q;
  p.A_eq.block(n, n, n, n).setIdentity();
  p.A_eq.block(n, 2 * n, n, n) = -dt * MatX::Identity(n, n);
  p.b_eq.segment(n, n) = s0.qd;
  p.A_eq.block(2 * n, 2 * n, 6, n) = J0;
  p.A_eq.block(2 * n, 3 * n, 6, 6) = -MatX::Identity(6, 6);
  p.b_eq.segment(2 * n, 6) = u_task - h0;

  p.A_in = MatX::Zero(8 * n, d);
  p.b_in = VecX::Zero(8 * n);
  auto box = [&](int row0, int col0, const VecX& lo, const VecX& hi) {
    p.A_in.block(row0, col0, n, n).setIdentity();
    p.b_in.segment(row0, n) = lo;
    p.A_in.block(row0 + n, col0, n, n) = -MatX::Identity(n, n);
    p.b_in.segment(row0 + n, n) = -hi;
  };
  box(0, 0, limits.q_min, limits.q_max);
  box(2 * n, n, limits.qd_min, limits.qd_max);
  box(4 * n, 2 * n, acc_lo, acc_hi);
  // jerk band: limit the change of commanded acceleration across one step
  box(6 * n, 2 * n, jerk_lo, jerk_hi);
  return p;
}

/// One resolved-acceleration control step: builds the QP at the current state
/// and returns the next joint-space command.  Solver failures are fatal and
/// carry a full dump of the offending problem.
inline JointCommand rac_step(const JointState& s0, const Vec6& u_task, const Mat6X& J0,
                             const Vec6& h0, const Limits& limits, const RacWeights& weights,
                             double dt, GoldfarbIdnani& solver,
                             std::span<const int> warm_start = {},
                             std::vector<int>* active_out = nullptr) {
  const QpProblem p = build_rac_qp(s0, u_task, J0, h0, limits, weights, dt);
  QpSolution sol;
  try {
    sol = solver.solve(p, warm_start);
  } catch (const Error& e) {
    throw Error(std::string("rac: qp solve failed: ") + e.what() + "\n" + dump_problem(p));
  }
  const int n = static_cast<int>(s0.q.size());
  JointCommand cmd;
  cmd.q = sol.x.segment(0, n);
  cmd.qd = sol.x.segment(n, n);
  cmd.qdd = sol.x.segment(2 * n, n);
  cmd.slack = sol.x.segment(3 * n, 6);
  cmd.feasible_without_slack = cmd.slack.cwiseAbs().maxCoeff() < kSlackTol;
  if (active_out) *active_out = sol.active_set;
  return cmd;
}

}  // namespace sloshfree
