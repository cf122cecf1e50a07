#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "arbbounds/linear_program.hpp"
#include "arbbounds/semidefinite_program.hpp"

#include <Eigen/Dense>

using namespace arbbounds;

TEST_CASE("trace-normalized minimization returns the smallest eigenvalue") {
  Eigen::MatrixXd C(3, 3);
  C << 1.0, 0.4, -0.2,
       0.4, 2.0, 0.6,
      -0.2, 0.6, 0.5;
  SemidefiniteProgram sdp;
  sdp.dim = 3;
  sdp.objective = C;
  sdp.equalities.push_back({Eigen::MatrixXd::Identity(3, 3), 1.0});

  SdpSolution sol = solve_sdp(sdp);
  REQUIRE(sol.status == SolveStatus::Optimal);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C, Eigen::EigenvaluesOnly);
  CHECK(sol.objective == doctest::Approx(eig.eigenvalues().minCoeff()).epsilon(1e-7));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ex(sol.X, Eigen::EigenvaluesOnly);
  CHECK(ex.eigenvalues().minCoeff() >= -1e-8);
  CHECK(sol.duality_gap <= 1e-8);
}

TEST_CASE("one-dimensional problems reduce to the LP answer") {
  // min 2x s.t. 3x = 6, x >= 0, posed both ways.
  SemidefiniteProgram sdp;
  sdp.dim = 1;
  sdp.objective = 2.0 * Eigen::MatrixXd::Ones(1, 1);
  sdp.equalities.push_back({3.0 * Eigen::MatrixXd::Ones(1, 1), 6.0});
  SdpSolution s1 = solve_sdp(sdp);

  LinearProgram lp;
  lp.objective = 2.0 * Eigen::VectorXd::Ones(1);
  lp.eq_coeffs = 3.0 * Eigen::MatrixXd::Ones(1, 1);
  lp.eq_rhs = 6.0 * Eigen::VectorXd::Ones(1);
  lp.lower = Eigen::VectorXd::Zero(1);
  LpSolution s2 = solve_lp(lp);

  REQUIRE(s1.status == SolveStatus::Optimal);
  REQUIRE(s2.status == SolveStatus::Optimal);
  CHECK(s1.objective == doctest::Approx(s2.objective).epsilon(1e-8));
  CHECK(s1.objective == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("an LP embedded on the diagonal of an SDP agrees within 10x tolerance") {
  // min 3 x0 + x1 + 2 x2 s.t. x0 + x1 + x2 = 1, x0 - x1 = 0.2, x >= 0.
  Eigen::VectorXd c(3);
  c << 3.0, 1.0, 2.0;
  Eigen::MatrixXd A(2, 3);
  A << 1.0, 1.0, 1.0,
       1.0, -1.0, 0.0;
  Eigen::VectorXd b(2);
  b << 1.0, 0.2;

  LinearProgram lp;
  lp.objective = c;
  lp.eq_coeffs = A;
  lp.eq_rhs = b;
  lp.lower = Eigen::VectorXd::Zero(3);
  LpSolution ls = solve_lp(lp);

  SemidefiniteProgram sdp;
  sdp.dim = 3;
  sdp.objective = c.asDiagonal();
  for (int r = 0; r < 2; ++r) {
    Eigen::MatrixXd Ar = A.row(r).asDiagonal();
    sdp.equalities.push_back({Ar, b[r]});
  }
  SdpSolution ss = solve_sdp(sdp);

  REQUIRE(ls.status == SolveStatus::Optimal);
  REQUIRE(ss.status == SolveStatus::Optimal);
  CHECK(std::abs(ls.objective - ss.objective) <= 10.0 * 1e-8);
}

TEST_CASE("maximizing a nonzero PSD objective with no constraints is unbounded") {
  Eigen::MatrixXd omega(2, 2);
  omega << 1.0, 0.5, 0.5, 0.5;
  SemidefiniteProgram sdp;
  sdp.dim = 2;
  sdp.sense = Sense::Maximize;
  sdp.objective = omega;
  SdpSolution sol = solve_sdp(sdp);
  REQUIRE(sol.status == SolveStatus::Unbounded);
  // The ray improves the stated (maximization) sense.
  CHECK((sol.ray.array() * omega.array()).sum() > 0.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sol.ray, Eigen::EigenvaluesOnly);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
}

TEST_CASE("infeasible trace pins produce a verifying dual ray") {
  SemidefiniteProgram sdp;
  sdp.dim = 2;
  sdp.objective = Eigen::MatrixXd::Identity(2, 2);
  // Tr(X) = -1 is impossible on the PSD cone.
  sdp.equalities.push_back({Eigen::MatrixXd::Identity(2, 2), -1.0});
  SdpSolution sol = solve_sdp(sdp);
  REQUIRE(sol.status == SolveStatus::Infeasible);
  auto [margin, by] = sdp_farkas_residual(sdp, sol.farkas);
  CHECK(margin >= -1e-8);
  CHECK(by > 1e-9);
}

TEST_CASE("affine PSD constraints on the decision scalars are honored") {
  SUBCASE("scalar floor through a 1x1 constraint") {
    // min Tr(X), X PSD 2x2, with X00 - 3 >= 0.
    SemidefiniteProgram sdp;
    sdp.dim = 2;
    sdp.objective = Eigen::MatrixXd::Identity(2, 2);
    LmiConstraint lmi;
    lmi.constant = -3.0 * Eigen::MatrixXd::Ones(1, 1);
    lmi.terms.push_back({svec_index(0, 0, 2), Eigen::MatrixXd::Ones(1, 1)});
    sdp.lmis.push_back(lmi);
    SdpSolution sol = solve_sdp(sdp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(sol.X(0, 0) == doctest::Approx(3.0).epsilon(1e-6));
  }
  SUBCASE("off-diagonal coupling through a 2x2 constraint") {
    // min X00 + X11 with [[X00, 1], [1, X11]] PSD: minimum 2 at X00 = X11 = 1.
    SemidefiniteProgram sdp;
    sdp.dim = 2;
    sdp.objective = Eigen::MatrixXd::Identity(2, 2);
    LmiConstraint lmi;
    lmi.constant.resize(2, 2);
    lmi.constant << 0.0, 1.0, 1.0, 0.0;
    Eigen::MatrixXd E00 = Eigen::MatrixXd::Zero(2, 2);
    E00(0, 0) = 1.0;
    Eigen::MatrixXd E11 = Eigen::MatrixXd::Zero(2, 2);
    E11(1, 1) = 1.0;
    lmi.terms.push_back({svec_index(0, 0, 2), E00});
    lmi.terms.push_back({svec_index(1, 1, 2), E11});
    sdp.lmis.push_back(lmi);
    SdpSolution sol = solve_sdp(sdp);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(sol.X(0, 0) * sol.X(1, 1) >= 1.0 - 1e-5);
  }
}

TEST_CASE("asymmetric inputs are rejected") {
  SemidefiniteProgram sdp;
  sdp.dim = 2;
  sdp.objective.resize(2, 2);
  sdp.objective << 1.0, 2.0, 0.0, 1.0;  // not symmetric
  CHECK_THROWS_AS(solve_sdp(sdp), std::invalid_argument);
}

TEST_CASE("objective scaling scales the value and keeps the optimizer") {
  Eigen::MatrixXd C(2, 2);
  C << 1.0, -0.3, -0.3, 2.0;
  SemidefiniteProgram sdp;
  sdp.dim = 2;
  sdp.objective = C;
  sdp.equalities.push_back({Eigen::MatrixXd::Identity(2, 2), 1.0});
  SdpSolution base = solve_sdp(sdp);
  sdp.objective = 5.0 * C;
  SdpSolution scaled = solve_sdp(sdp);
  REQUIRE(base.status == SolveStatus::Optimal);
  REQUIRE(scaled.status == SolveStatus::Optimal);
  CHECK(scaled.objective == doctest::Approx(5.0 * base.objective).epsilon(1e-7));
  CHECK((scaled.X - base.X).cwiseAbs().maxCoeff() <= 1e-6);
}
