#include "sloshfree/qp.hpp"

#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace sloshfree;

namespace {

QpProblem clamp_problem() {
  // min x^2 subject to x >= 1
  QpProblem p;
  p.P = MatX::Constant(1, 1, 2.0);
  p.lin = VecX::Zero(1);
  p.A_eq = MatX(0, 1);
  p.b_eq = VecX(0);
  p.A_in = MatX::Constant(1, 1, 1.0);
  p.b_in = VecX::Constant(1, 1.0);
  return p;
}

}  // namespace

TEST_CASE("scalar clamp: active bound, multiplier two", "[qp]") {
  GoldfarbIdnani solver;
  const QpProblem p = clamp_problem();
  const QpSolution sol = solver.solve(p);
  CHECK(std::abs(sol.x(0) - 1.0) < 1e-12);
  CHECK(std::abs(sol.objective - 1.0) < 1e-12);
  REQUIRE(sol.active_set.size() == 1);
  CHECK(sol.active_set[0] == 0);
  CHECK(std::abs(sol.mult_in(0) - 2.0) < 1e-12);
  CHECK(kkt_residuals(p, sol.x, sol.mult_eq, sol.mult_in).worst() < 1e-12);

  // perturbing the minimiser shows up in the stationarity residual
  VecX x_bad = sol.x;
  x_bad(0) += 0.1;
  const KktReport rep = kkt_residuals(p, x_bad, sol.mult_eq, sol.mult_in);
  CHECK(std::abs(rep.stationarity - 0.2) < 1e-12);
  CHECK(rep.in_violation == 0.0);
  CHECK(rep.eq_residual == 0.0);
}

TEST_CASE("equality constraint projects the unconstrained minimum", "[qp]") {
  // min |x|^2 subject to x0 + x1 = 1  ->  x = (1/2, 1/2), multiplier 1
  QpProblem p;
  p.P = 2.0 * MatX::Identity(2, 2);
  p.lin = VecX::Zero(2);
  p.A_eq = MatX::Ones(1, 2);
  p.b_eq = VecX::Ones(1);
  p.A_in = MatX(0, 2);
  p.b_in = VecX(0);
  GoldfarbIdnani solver;
  const QpSolution sol = solver.solve(p);
  CHECK((sol.x - VecX::Constant(2, 0.5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::abs(sol.mult_eq(0) - 1.0) < 1e-12);
  CHECK(sol.active_set.empty());
  CHECK(kkt_residuals(p, sol.x, sol.mult_eq, sol.mult_in).worst() < 1e-12);
}

TEST_CASE("random problems match exhaustive active-set enumeration", "[qp]") {
  std::mt19937 rng(43);
  GoldfarbIdnani solver;
  std::uniform_int_distribution<int> dim(2, 6);
  std::uniform_int_distribution<int> n_eq(0, 2);
  std::uniform_int_distribution<int> n_in(1, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = dim(rng);
    const int me = std::min(n_eq(rng), d - 1);
    const int mi = n_in(rng);
    const QpProblem p = testutil::random_feasible_qp(rng, d, me, mi);
    const QpSolution sol = solver.solve(p);
    const double oracle = testutil::enumerate_qp_min(p);
    REQUIRE(std::isfinite(oracle));
    CHECK(std::abs(sol.objective - oracle) < 1e-7);
    CHECK(kkt_residuals(p, sol.x, sol.mult_eq, sol.mult_in).worst() < 1e-8);
  }
}

TEST_CASE("duplicate and redundant rows keep the solution consistent", "[qp]") {
  QpProblem p = clamp_problem();
  // same inequality twice: multipliers may split but KKT must still hold
  p.A_in = MatX::Ones(2, 1);
  p.b_in = VecX::Ones(2);
  GoldfarbIdnani solver;
  const QpSolution sol = solver.solve(p);
  CHECK(std::abs(sol.x(0) - 1.0) < 1e-12);
  CHECK(kkt_residuals(p, sol.x, sol.mult_eq, sol.mult_in).worst() < 1e-10);

  // a strictly weaker copy of the bound never activates
  QpProblem q = clamp_problem();
  q.A_in.conservativeResize(2, 1);
  q.b_in.conservativeResize(2);
  q.A_in(1, 0) = 1.0;
  q.b_in(1) = 0.0;  // x >= 0, implied by x >= 1
  const QpSolution sol2 = solver.solve(q);
  CHECK(std::abs(sol2.x(0) - 1.0) < 1e-12);
  REQUIRE(sol2.active_set.size() == 1);
  CHECK(sol2.active_set[0] == 0);
}

TEST_CASE("infeasible systems are reported as such", "[qp]") {
  GoldfarbIdnani solver;
  // x >= 1 and x <= 0 cannot both hold
  QpProblem p = clamp_problem();
  p.A_in.conservativeResize(2, 1);
  p.b_in.conservativeResize(2);
  p.A_in(1, 0) = -1.0;
  p.b_in(1) = 0.0;
  CHECK_THROWS_AS(solver.solve(p), QpInfeasible);

  // inconsistent equalities
  QpProblem q;
  q.P = MatX::Identity(2, 2);
  q.lin = VecX::Zero(2);
  q.A_eq = MatX(2, 2);
  q.A_eq << 1, 0, 1, 0;
  q.b_eq = VecX(2);
  q.b_eq << 0, 1;
  q.A_in = MatX(0, 2);
  q.b_in = VecX(0);
  CHECK_THROWS_AS(solver.solve(q), QpInfeasible);
}

TEST_CASE("non-positive-definite costs are a numerical error", "[qp]") {
  GoldfarbIdnani solver;
  QpProblem p = clamp_problem();
  p.P(0, 0) = 0.0;
  CHECK_THROWS_AS(solver.solve(p), QpNumericalError);
  p.P(0, 0) = -1.0;
  CHECK_THROWS_AS(solver.solve(p), QpNumericalError);
}

TEST_CASE("problem validation rejects inconsistent shapes", "[qp]") {
  GoldfarbIdnani solver;
  QpProblem p = clamp_problem();
  p.lin = VecX::Zero(2);
  CHECK_THROWS_AS(solver.solve(p), Error);

  p = clamp_problem();
  p.b_in = VecX::Zero(2);
  CHECK_THROWS_AS(solver.solve(p), Error);

  QpProblem asym;
  asym.P = MatX(2, 2);
  asym.P << 1, 0.5, 0.0, 1;
  asym.lin = VecX::Zero(2);
  asym.A_eq = MatX(0, 2);
  asym.b_eq = VecX(0);
  asym.A_in = MatX(0, 2);
  asym.b_in = VecX(0);
  CHECK_THROWS_AS(solver.solve(asym), Error);

  QpProblem nan_p = clamp_problem();
  nan_p.b_in(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(solver.solve(nan_p), Error);
}

TEST_CASE("warm-start hints never change the minimiser", "[qp]") {
  std::mt19937 rng(47);
  GoldfarbIdnani solver;
  for (int trial = 0; trial < 50; ++trial) {
    const QpProblem p = testutil::random_feasible_qp(rng, 5, 1, 6);
    const QpSolution cold = solver.solve(p);
    const QpSolution warm = solver.solve(p, cold.active_set);
    CHECK((cold.x - warm.x).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(warm.active_set == cold.active_set);
    // nonsense hints are ignored gracefully
    const std::vector<int> junk{99, -3, 0};
    const QpSolution odd = solver.solve(p, junk);
    CHECK((cold.x - odd.x).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("problem dump carries the dimensions and data", "[qp]") {
  const std::string dump = dump_problem(clamp_problem());
  CHECK(dump.find("dim=1") != std::string::npos);
  CHECK(dump.find("n_in=1") != std::string::npos);
  CHECK(dump.find("P =") != std::string::npos);
}
