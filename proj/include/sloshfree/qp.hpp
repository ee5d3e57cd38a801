#pragma once

#include "sloshfree/common.hpp"

#include <algorithm>
#include <limits>
#include <span>
#include <sstream>
#include <vector>

namespace sloshfree {

/// Strictly convex quadratic program
///
///   min  1/2 x^T P x + lin^T x
///   s.t. A_eq x  = b_eq
///        A_in x >= b_in
///
/// P must be symmetric positive definite.
struct QpProblem {
  MatX P;
  VecX lin;
  MatX A_eq;
  VecX b_eq;
  MatX A_in;
  VecX b_in;

  Eigen::Index dim() const { return P.rows(); }
  Eigen::Index n_eq() const { return A_eq.rows(); }
  Eigen::Index n_in() const { return A_in.rows(); }

  void validate() const {
    const Eigen::Index d = dim();
    if (d == 0) throw Error("qp: empty problem");
    if (P.cols() != d) throw Error("qp: cost matrix must be square");
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, P.cwiseAbs().maxCoeff()))
      throw Error("qp: cost matrix must be symmetric");
    if (lin.size() != d) throw Error("qp: linear term has wrong dimension");
    if (A_eq.rows() != b_eq.size() || (A_eq.rows() > 0 && A_eq.cols() != d))
      throw Error("qp: equality block has inconsistent dimensions");
    if (A_in.rows() != b_in.size() || (A_in.rows() > 0 && A_in.cols() != d))
      throw Error("qp: inequality block has inconsistent dimensions");
    if (!P.allFinite() || !lin.allFinite() || !A_eq.allFinite() || !b_eq.allFinite() ||
        !A_in.allFinite() || !b_in.allFinite())
      throw Error("qp: problem data contains non-finite values");
  }
};

struct QpSolution {
  VecX x;
  VecX mult_eq;                 // equality multipliers (free sign)
  VecX mult_in;                 // inequality multipliers (>= 0, dense over rows)
  std::vector<int> active_set;  // binding inequality rows, ascending
  int iterations = 0;           // constraint additions + deletions
  double objective = 0.0;
};

struct QpInfeasible : Error {
  using Error::Error;
};
struct QpNumericalError : Error {
  using Error::Error;
};
struct QpIterationLimit : Error {
  using Error::Error;
};

/// Residuals of the KKT system at a candidate point, with the stationarity
/// convention  P x + lin - A_eq^T mult_eq - A_in^T mult_in = 0.
struct KktReport {
  double stationarity = 0.0;     // inf-norm of the gradient of the Lagrangian
  double eq_residual = 0.0;      // inf-norm of A_eq x - b_eq
  double in_violation = 0.0;     // largest violation of A_in x >= b_in
  double dual_violation = 0.0;   // largest negative inequality multiplier
  double complementarity = 0.0;  // largest |mult_i * slack_i|

  double worst() const {
    return std::max({stationarity, eq_residual, in_violation, dual_violation, complementarity});
  }
};

inline KktReport kkt_residuals(const QpProblem& p, const VecX& x, const VecX& mult_eq,
                               const VecX& mult_in) {
  KktReport rep;
  VecX grad = p.P * x + p.lin;
  if (p.n_eq() > 0) grad -= p.A_eq.transpose() * mult_eq;
  if (p.n_in() > 0) grad -= p.A_in.transpose() * mult_in;
  rep.stationarity = grad.cwiseAbs().maxCoeff();
  if (p.n_eq() > 0) rep.eq_residual = (p.A_eq * x - p.b_eq).cwiseAbs().maxCoeff();
  if (p.n_in() > 0) {
    const VecX slack = p.A_in * x - p.b_in;
    rep.in_violation = std::max(0.0, (-slack).maxCoeff());
    rep.dual_violation = std::max(0.0, (-mult_in).maxCoeff());
    rep.complementarity = (mult_in.array() * slack.array()).abs().maxCoeff();
  }
  return rep;
}

/// Full-precision text dump of a problem, for post-mortem diagnostics.
inline std::string dump_problem(const QpProblem& p) {
  const Eigen::IOFormat fmt(Eigen::FullPrecision, 0, ", ", "\n", "  [", "]");
  std::ostringstream os;
  os << "qp problem: dim=" << p.dim() << " n_eq=" << p.n_eq() << " n_in=" << p.n_in() << "\n";
  os << "P =\n" << p.P.format(fmt) << "\nlin =\n" << p.lin.transpose().format(fmt) << "\n";
  if (p.n_eq() > 0)
    os << "A_eq =\n" << p.A_eq.format(fmt) << "\nb_eq =\n"
       << p.b_eq.transpose().format(fmt) << "\n";
  if (p.n_in() > 0)
    os << "A_in =\n" << p.A_in.format(fmt) << "\nb_in =\n"
       << p.b_in.transpose().format(fmt) << "\n";
  return os.str();
}

/// Dual active-set solver for strictly convex QPs after Goldfarb and Idnani.
///
/// The solver starts from the unconstrained minimiser and adds violated
/// constraints one at a time, taking the dual steps required to keep all
/// multipliers non-negative.  The working state is the pair (J, R) with
/// J = L^-T Q for the Cholesky factor L of P and the QR factorisation
/// Q R = L^-1 N of the active normals N, updated by Givens rotations on
/// every change of the active set.
///
/// All tie-breaks are deterministic: the most violated constraint is chosen
/// first and index order decides ties, so identical problems yield identical
/// iterates.  A warm-start hint only prioritises which violated constraint
/// is examined first; it never changes the minimiser.
class GoldfarbIdnani {
 public:
  QpSolution solve(const QpProblem& p) { return solve(p, {}); }

  QpSolution solve(const QpProblem& p, std::span<const int> warm_start) {
    p.validate();
    const Eigen::Index d = p.dim();
    const int me = static_cast<int>(p.n_eq());
    const int mi = static_cast<int>(p.n_in());
    const int max_iter = 10 * static_cast<int>(d + mi);

    Eigen::LLT<MatX> llt(p.P);
    if (llt.info() != Eigen::Success)
      throw QpNumericalError("qp: cost matrix is not positive definite");
    const MatX L = llt.matrixL();
    if (L.diagonal().minCoeff() <= 1e-12)
      throw QpNumericalError("qp: cost matrix is numerically singular");

    x_ = -llt.solve(p.lin);
    J_ = L.transpose().template triangularView<Eigen::Upper>().solve(MatX::Identity(d, d));
    R_.setZero(d, d);
    u_.setZero(d);
    active_.clear();
    q_ = 0;
    r_norm_ = 1.0;
    int iters = 0;

    // Phase 1: install the equality constraints.  They are never removed.
    for (int i = 0; i < me; ++i) {
      const VecX np = p.A_eq.row(i).transpose();
      d_ = J_.transpose() * np;
      const VecX z = J_.rightCols(d - q_) * d_.tail(d - q_);
      VecX r;
      if (q_ > 0)
        r = R_.topLeftCorner(q_, q_).template triangularView<Eigen::Upper>().solve(d_.head(q_));
      const double resid = p.b_eq(i) - np.dot(x_);
      const double zn = z.dot(np);  // = |J2^T np|^2 >= 0
      double step = 0.0;
      if (step_direction_nonzero(d)) {
        step = resid / zn;
      } else if (std::abs(resid) > 1e-9 * std::max(1.0, p.b_eq.cwiseAbs().maxCoeff())) {
        throw QpInfeasible("qp: inconsistent equality constraints");
      }
      x_ += step * z;
      if (q_ > 0) u_.head(q_) -= step * r;
      u_(q_) = step;
      if (!add_constraint(d))
        throw QpNumericalError("qp: linearly dependent equality constraints");
      active_.push_back(i);
      ++iters;
    }

    // Phase 2: add violated inequalities, dropping blocking constraints.
    std::vector<char> is_active(static_cast<size_t>(mi), 0);
    while (true) {
      if (iters > max_iter) throw QpIterationLimit("qp: iteration limit exceeded");
      const int pick = pick_violated(p, is_active, warm_start);
      if (pick < 0) break;  // dual feasible and primal feasible: optimal
      const VecX np = p.A_in.row(pick).transpose();
      double u_plus = 0.0;

      while (true) {
        ++iters;
        if (iters > max_iter) throw QpIterationLimit("qp: iteration limit exceeded");
        d_ = J_.transpose() * np;
        const VecX z = J_.rightCols(d - q_) * d_.tail(d - q_);
        VecX r;
        if (q_ > 0)
          r = R_.topLeftCorner(q_, q_).template triangularView<Eigen::Upper>().solve(d_.head(q_));

        // Longest dual step that keeps the active multipliers non-negative;
        // only inequality members may leave the active set.
        double t1 = std::numeric_limits<double>::infinity();
        int leave = -1;
        for (int j = me; j < q_; ++j) {
          if (r.size() > j && r(j) > 0.0 && u_(j) / r(j) < t1) {
            t1 = u_(j) / r(j);
            leave = j;
          }
        }
        const double slack = np.dot(x_) - p.b_in(pick);  // negative: violated
        const bool z_ok = step_direction_nonzero(d);
        const double t2 = z_ok ? -slack / z.dot(np) : std::numeric_limits<double>::infinity();
        const double t = std::min(t1, t2);
        if (!std::isfinite(t))
          throw QpInfeasible("qp: infeasible constraint system");

        if (!z_ok) {
          // Pure dual step: the new normal lies in the span of the active
          // ones, so x cannot move; drop the blocking constraint and retry.
          u_.head(q_) -= t * r;
          u_plus += t;
          is_active[static_cast<size_t>(active_[static_cast<size_t>(leave)] - me)] = 0;
          delete_constraint(leave);
          continue;
        }

        x_ += t * z;
        u_.head(q_) -= t * r;
        u_plus += t;
        if (t == t2) {
          // Full step: constraint `pick` becomes active.
          u_(q_) = u_plus;
          if (!add_constraint(d))
            throw QpNumericalError("qp: failed to extend the active-set factorisation");
          active_.push_back(me + pick);
          is_active[static_cast<size_t>(pick)] = 1;
          break;
        }
        // Partial step: a previously active constraint hit zero multiplier.
        is_active[static_cast<size_t>(active_[static_cast<size_t>(leave)] - me)] = 0;
        delete_constraint(leave);
      }
    }

    QpSolution sol;
    sol.x = x_;
    sol.mult_eq = VecX::Zero(me);
    sol.mult_in = VecX::Zero(mi);
    for (int j = 0; j < q_; ++j) {
      const int id = active_[static_cast<size_t>(j)];
      if (id < me) {
        sol.mult_eq(id) = u_(j);
      } else {
        sol.mult_in(id - me) = u_(j);
        sol.active_set.push_back(id - me);
      }
    }
    std::sort(sol.active_set.begin(), sol.active_set.end());
    sol.iterations = iters;
    sol.objective = 0.5 * x_.dot(p.P * x_) + p.lin.dot(x_);
    return sol;
  }

 private:
  static constexpr double kActivationTol = 1e-10;

  /// The projection of the candidate normal onto the complement of the active
  /// span, measured in the metric where it is computed.  A relative test on
  /// the split of d = J^T np decides whether a primal step exists.
  bool step_direction_nonzero(Eigen::Index d) const {
    const double tail2 = d_.tail(d - q_).squaredNorm();
    return tail2 > 1e-24 * std::max(1.0, d_.squaredNorm());
  }

  /// Most-violated-first selection with lowest-index tie-break.  Indices in
  /// `warm_start` are examined first: if any of them is violated the worst
  /// one wins, which tends to rebuild the previous active set cheaply.
  int pick_violated(const QpProblem& p, const std::vector<char>& is_active,
                    std::span<const int> warm_start) const {
    const int mi = static_cast<int>(p.n_in());
    auto scan = [&](auto&& indices) {
      int best = -1;
      double worst = -kActivationTol;
      for (int k : indices) {
        if (k < 0 || k >= mi || is_active[static_cast<size_t>(k)]) continue;
        const double s = p.A_in.row(k).dot(x_) - p.b_in(k);
        if (s < worst) {
          worst = s;
          best = k;
        }
      }
      return best;
    };
    if (!warm_start.empty()) {
      const int hinted = scan(warm_start);
      if (hinted >= 0) return hinted;
    }
    std::vector<int> all(static_cast<size_t>(mi));
    for (int k = 0; k < mi; ++k) all[static_cast<size_t>(k)] = k;
    return scan(all);
  }

  /// Append the triangularised normal as a new column of R.  The rotations
  /// that zero the tail of d are mirrored onto the columns of J to keep
  /// J^T N = [R; 0].  Returns false if the normal is numerically dependent.
  bool add_constraint(Eigen::Index d) {
    for (Eigen::Index j = d - 1; j > q_; --j) {
      const double cc = d_(j - 1);
      const double ss = d_(j);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      const double c = cc / h, s = ss / h;
      d_(j - 1) = h;
      d_(j) = 0.0;
      rotate_columns(J_, j - 1, j, c, s);
    }
    if (std::abs(d_(q_)) <= 1e-12 * std::max(r_norm_, 1.0)) return false;
    R_.col(q_).head(q_ + 1) = d_.head(q_ + 1);
    r_norm_ = std::max(r_norm_, std::abs(d_(q_)));
    ++q_;
    return true;
  }

  /// Remove the active constraint at position `pos` and restore the
  /// triangular structure of R with row rotations, mirrored onto J.
  void delete_constraint(int pos) {
    for (int i = pos; i < q_ - 1; ++i) {
      active_[static_cast<size_t>(i)] = active_[static_cast<size_t>(i + 1)];
      u_(i) = u_(i + 1);
      R_.col(i) = R_.col(i + 1);
    }
    active_.pop_back();
    u_(q_ - 1) = 0.0;
    R_.col(q_ - 1).setZero();
    --q_;
    for (int k = pos; k < q_; ++k) {
      const double cc = R_(k, k);
      const double ss = R_(k + 1, k);
      const double h = std::hypot(cc, ss);
      if (h == 0.0) continue;
      const double c = cc / h, s = ss / h;
      for (int col = k; col < q_; ++col) {
        const double t1 = R_(k, col);
        const double t2 = R_(k + 1, col);
        R_(k, col) = c * t1 + s * t2;
        R_(k + 1, col) = -s * t1 + c * t2;
      }
      R_(k + 1, k) = 0.0;
      rotate_columns(J_, k, k + 1, c, s);
    }
  }

  static void rotate_columns(MatX& M, Eigen::Index a, Eigen::Index b, double c, double s) {
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
      const double t1 = M(i, a);
      const double t2 = M(i, b);
      M(i, a) = c * t1 + s * t2;
      M(i, b) = -s * t1 + c * t2;
    }
  }

  // Workspace, reused across solves.
  MatX J_, R_;
  VecX x_, u_, d_;
  std::vector<int> active_;
  int q_ = 0;
  double r_norm_ = 1.0;
};

}  // namespace sloshfree
