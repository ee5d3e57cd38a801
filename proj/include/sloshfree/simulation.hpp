#pragma once

#include "sloshfree/common.hpp"
#include "sloshfree/flatness.hpp"
#include "sloshfree/kinematics.hpp"
#include "sloshfree/metrics.hpp"
#include "sloshfree/rac.hpp"
#include "sloshfree/task_control.hpp"
#include "sloshfree/trajectory.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace sloshfree {

enum class ControlMode { slosh_free, upright_baseline };

inline std::string mode_name(ControlMode m) {
  return m == ControlMode::slosh_free ? "slosh_free" : "baseline";
}

inline ControlMode parse_mode(const std::string& s) {
  if (s == "slosh_free") return ControlMode::slosh_free;
  if (s == "baseline" || s == "upright_baseline") return ControlMode::upright_baseline;
  throw ParseError("unknown mode '" + s + "' (expected slosh_free or baseline)");
}

/// Everything a closed-loop run needs.  `q_init` may be left empty, in which
/// case the setup routine solves for a configuration that reaches the
/// trajectory start with identity orientation.
struct ExperimentConfig {
  KinematicModel model;
  Trajectory trajectory{LoopShape{}, 0.0, 6.0};
  ControlMode mode = ControlMode::slosh_free;
  double dt = 1e-3;
  TaskGains gains;
  RacWeights weights = RacWeights::defaults(7);
  FlatnessParams flatness;
  VecX q_init;               // optional; resolved by setup when empty
  double transient = 0.2;    // [s] excluded from the max slosh-angle metric
  double slack_tol = kSlackTol;
  double eps_sf_deg = 1.0;   // reporting threshold on the peak slosh angle

  void validate() const {
    model.validate();
    gains.validate();
    weights.validate(model.n());
    if (!(dt > 0.0)) throw Error("config: dt must be positive");
    if (trajectory.duration() < 2.0 * dt)
      throw Error("config: navigation time too short for the control interval");
    if (q_init.size() != 0) {
      if (q_init.size() != model.n()) throw Error("config: q_init has wrong dimension");
      if (((q_init - model.limits.q_min).array() < 0.0).any() ||
          ((model.limits.q_max - q_init).array() < 0.0).any())
        throw Error("config: q_init violates joint limits");
    }
  }
};

namespace detail {

/// One damped-least-squares IK solve from the given seed; std::nullopt when
/// the pose error does not reach tolerance within the iteration budget.
inline std::optional<VecX> dls_ik(const KinematicModel& model, const Vec3& p_target,
                                  const Mat3& R_target, VecX q) {
  constexpr double lambda = 0.1;  // damping
  constexpr double step = 0.5;    // step scale
  constexpr int max_iters = 500;
  for (int it = 0; it < max_iters; ++it) {
    const EePose pose = forward_kinematics(model, q);
    Vec6 e;
    e.head<3>() = p_target - pose.p;
    e.tail<3>() = orientation_error(R_target, pose.R);
    if (e.head<3>().norm() < 1e-4 && e.tail<3>().norm() < 1e-3) return q;
    const Mat6X J = jacobian(model, q);
    const Eigen::Matrix<double, 6, 6> JJt =
        J * J.transpose() + lambda * lambda * Eigen::Matrix<double, 6, 6>::Identity();
    q += step * (J.transpose() * JJt.ldlt().solve(e));
    q = q.cwiseMax(model.limits.q_min).cwiseMin(model.limits.q_max);
  }
  return std::nullopt;
}

/// Deterministic fan of nominal postures around the model home.  The shoulder
/// and elbow pitch joints select between the arm's redundant posture
/// families, so perturbing only those two is enough to reach every useful
/// solution basin while keeping the seed list small.
inline std::vector<VecX> seed_fan(const KinematicModel& model) {
  const int n = model.n();
  const VecX home = model.q_home.size() == n
                        ? model.q_home
                        : VecX(0.5 * (model.limits.q_min + model.limits.q_max));
  std::vector<VecX> seeds;
  for (double d_shoulder : {0.0, -0.5, 0.5})
    for (double d_elbow : {0.0, -0.6, 0.6}) {
      VecX s = home;
      if (n > 1) s(1) += d_shoulder;
      if (n > 3) s(3) += d_elbow;
      seeds.push_back(s.cwiseMax(model.limits.q_min).cwiseMin(model.limits.q_max));
    }
  return seeds;
}

/// Smallest distance from any joint to its nearer position stop.
inline double joint_margin(const Limits& lim, const VecX& q) {
  return std::min((q - lim.q_min).minCoeff(), (lim.q_max - q).minCoeff());
}

}  // namespace detail

/// Damped-least-squares inverse kinematics used once per run to place the
/// arm at a target pose with identity (upright) orientation by default.  A
/// deterministic fan of nominal postures seeds the solve and the converged
/// candidate farthest from the joint stops wins.
inline VecX setup_initial_configuration(const KinematicModel& model, const Vec3& p_target,
                                        const Mat3& R_target = Mat3::Identity()) {
  std::optional<VecX> best;
  double best_margin = -1.0;
  for (const VecX& seed : detail::seed_fan(model)) {
    const std::optional<VecX> q = detail::dls_ik(model, p_target, R_target, seed);
    if (!q) continue;
    const double margin = detail::joint_margin(model.limits, *q);
    if (margin > best_margin) {
      best_margin = margin;
      best = q;
    }
  }
  if (!best) throw Error("setup: inverse kinematics did not converge to the trajectory start");
  return *best;
}

/// Start-posture selection for a whole run.  The tracking controller has no
/// posture task, so the arm's redundancy must be resolved once, up front:
/// every converged seed of the fan is scored by a coarse first-order preview
/// of the full path.  The score is the peak share of the joint speed limits
/// the preview needs — one dimensionless number that folds the path's speed
/// demand, the posture's manipulability, and joint-limit crowding into a
/// direct predictor of actuator saturation; joint margins break ties.  The
/// preview tracks the slosh-free references; in baseline mode they describe
/// the same position path with mild orientation excursions, so both modes
/// start one experiment from the identical configuration.
inline VecX setup_initial_configuration(const KinematicModel& model, const Trajectory& traj,
                                        const FlatnessParams& flatness) {
  struct Scored {
    double max_rate = 0.0;  // peak |qd_i| / qd_max_i over the preview
    double min_margin = 0.0, mean_margin = 0.0;
    VecX q;
  };
  const auto better = [](const Scored& a, const Scored& b) {
    if (a.max_rate != b.max_rate) return a.max_rate < b.max_rate;
    if (a.min_margin != b.min_margin) return a.min_margin > b.min_margin;
    return a.mean_margin > b.mean_margin;
  };
  std::optional<Scored> best;
  for (const VecX& seed : detail::seed_fan(model)) {
    const std::optional<VecX> q0 =
        detail::dls_ik(model, traj.start_position(), Mat3::Identity(), seed);
    if (!q0) continue;
    constexpr int M = 240;  // preview resolution over the whole path
    const double dtc = traj.duration() / M;
    VecX q = *q0;
    Mat3 R_prev = Mat3::Identity();
    Scored cand;
    cand.q = *q0;
    cand.min_margin = detail::joint_margin(model.limits, q);
    for (int k = 1; k <= M; ++k) {
      const PoseReference ref =
          slosh_free_reference(traj, traj.t0() + k * dtc, flatness, R_prev);
      if (ref.flag == OrientationDegeneracy::none) R_prev = ref.R;
      const EePose pose = forward_kinematics(model, q);
      Vec6 v;
      v.head<3>() = ref.ref.v + 0.5 / dtc * (ref.ref.p - pose.p);
      v.tail<3>() = 0.5 / dtc * orientation_error(ref.R, pose.R);
      const Mat6X J = jacobian(model, q);
      const Eigen::Matrix<double, 6, 6> JJt =
          J * J.transpose() + 1e-4 * Eigen::Matrix<double, 6, 6>::Identity();
      const VecX qd = J.transpose() * JJt.ldlt().solve(v);
      q += dtc * qd;
      q = q.cwiseMax(model.limits.q_min).cwiseMin(model.limits.q_max);
      cand.max_rate =
          std::max(cand.max_rate, qd.cwiseAbs().cwiseQuotient(model.limits.qd_max).maxCoeff());
      const double m = detail::joint_margin(model.limits, q);
      cand.min_margin = std::min(cand.min_margin, m);
      cand.mean_margin += m / M;
    }
    if (!best || better(cand, *best)) best = cand;
  }
  if (!best) throw Error("setup: inverse kinematics did not converge to the trajectory start");
  return best->q;
}

/// Closed-loop kinematic simulation: the optimiser's own integration model is
/// the plant, so the joint state at step k+1 is exactly the (q, qd) block of
/// the step-k QP solution.  The log gains one record per control instant,
/// including the final one at t = T.
///
/// Throws when the orientation reference degenerates on more than a tenth of
/// the steps, which means the commanded accelerations hover around free fall
/// and the run is not meaningful.
inline RunLog run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const KinematicModel& model = cfg.model;
  const int n = model.n();
  const double T = cfg.trajectory.duration();
  const int N = static_cast<int>(std::llround(T / cfg.dt));

  JointState state;
  state.q = cfg.q_init.size() == n
                ? cfg.q_init
                : setup_initial_configuration(model, cfg.trajectory, cfg.flatness);
  state.qd = VecX::Zero(n);
  state.qdd = VecX::Zero(n);

  RunLog log;
  log.dt = cfg.dt;
  log.steps.reserve(static_cast<size_t>(N) + 1);

  GoldfarbIdnani solver;
  std::vector<int> active;
  std::vector<int> prev_active;
  Mat3 R_prev = Mat3::Identity();
  int degenerate_steps = 0;

  for (int k = 0; k <= N; ++k) {
    const double t = cfg.trajectory.t0() + std::min(static_cast<double>(k) * cfg.dt, T);
    const auto tic = std::chrono::steady_clock::now();

    const KinematicsEval kin = evaluate(model, state.q);
    const Vec6 nu = kin.J * state.qd;
    const Twist twist{nu.head<3>(), nu.tail<3>()};

    const PoseReference ref = cfg.mode == ControlMode::slosh_free
                                  ? slosh_free_reference(cfg.trajectory, t, cfg.flatness, R_prev)
                                  : upright_reference(cfg.trajectory, t);
    if (ref.flag != OrientationDegeneracy::none)
      ++degenerate_steps;
    else
      R_prev = ref.R;

    const Vec6 e_task = pose_error(ref.ref.p, ref.R, kin.pose);
    const Vec6 u_task = cascaded_pd(e_task, twist, cfg.gains);
    const Vec6 h0 = velocity_product(kin.H, state.qd);

    const JointCommand cmd = rac_step(state, u_task, kin.J, h0, model.limits, cfg.weights,
                                      cfg.dt, solver, prev_active, &active);
    prev_active = active;

    const auto toc = std::chrono::steady_clock::now();

    const Vec6 acc_exec = kin.J * cmd.qdd + h0;
    const SloshAngle sf =
        slosh_free_angle(acc_exec.head<3>(), kin.pose.R, cfg.flatness.g_comp, cfg.flatness.eps_acc);

    StepRecord rec;
    rec.t = t;
    rec.state = state;
    rec.state.qdd = cmd.qdd;  // acceleration actually applied over this step
    rec.ee = kin.pose;
    rec.twist = twist;
    rec.accel = SpatialAccel{acc_exec.head<3>(), acc_exec.tail<3>()};
    rec.p_ref = ref.ref.p;
    rec.R_ref = ref.R;
    rec.command = u_task;
    rec.slack = cmd.slack;
    rec.e_p = position_error(ref.ref.p, kin.pose.p);
    rec.e_sf = sf.angle;
    rec.ref_degenerate = ref.flag != OrientationDegeneracy::none;
    rec.esf_degenerate = sf.degenerate;
    rec.control_us =
        std::chrono::duration_cast<std::chrono::duration<double, std::micro>>(toc - tic).count();
    log.steps.push_back(rec);

    if (k < N) {
      state.q = cmd.q;
      state.qd = cmd.qd;
      state.qdd = cmd.qdd;
    }
  }

  if (degenerate_steps > (N + 1) / 10)
    throw Error("run: orientation reference degenerate on more than 10% of steps");
  return log;
}

}  // namespace sloshfree
