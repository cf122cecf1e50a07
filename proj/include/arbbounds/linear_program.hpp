#pragma once

// Linear programs over dense rows with optional variable bounds,
//
//   min or max  c'x
//   subject to  A_eq x  = b_eq
//               A_in x <= b_in
//               l <= x <= u   (entries may be -inf / +inf)
//
// solved by conversion to the conic standard form (shifts for finite lower
// bounds, reflections for upper-only bounds, splits for free variables,
// slacks for inequalities and boxes). Solutions, duals, rays and Farkas
// certificates are mapped back to the problem as stated.

#include "arbbounds/conic_solver.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>

namespace arbbounds {

enum class Sense { Minimize, Maximize };

struct LinearProgram {
  Sense sense = Sense::Minimize;
  Eigen::VectorXd objective;
  Eigen::MatrixXd eq_coeffs;    // may have zero rows
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_coeffs;  // rows are a'x <= rhs
  Eigen::VectorXd ineq_rhs;
  Eigen::VectorXd lower;        // empty means all -inf
  Eigen::VectorXd upper;        // empty means all +inf

  int num_vars() const { return static_cast<int>(objective.size()); }
  // Throws std::invalid_argument on inconsistent dimensions or NaN data.
  // Crossed bounds (l > u) are not an input error; they make the program
  // infeasible and are certified as such by solve_lp.
  void validate() const;
};

// Multipliers proving infeasibility: aggregating equalities with `eq`
// (free sign), inequality rows with `ineq` >= 0, bounds x_j >= l_j with
// `lower` >= 0 and x_j <= u_j with `upper` >= 0 yields 0'x <= rhs with
// rhs < 0. Entries for infinite bounds are zero.
struct LpFarkas {
  Eigen::VectorXd eq;
  Eigen::VectorXd ineq;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double violation = 0.0;  // -rhs of the aggregated contradiction
};

// (inf-norm of aggregated x coefficients, aggregated right-hand side).
// A valid certificate has the first near zero and the second negative.
std::pair<double, double> lp_farkas_residual(const LinearProgram& lp,
                                             const LpFarkas& cert);

struct LpSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;

  Eigen::VectorXd x;  // Optimal: solution in original variables

  // Multipliers of the minimization form (maximization is solved as
  // minimize -c and the multipliers refer to that form). At an optimum,
  // c_min = A_eq' eq_duals - A_in' ineq_duals + lower_duals - upper_duals
  // with ineq_duals and the bound duals nonnegative.
  Eigen::VectorXd eq_duals;
  Eigen::VectorXd ineq_duals;
  Eigen::VectorXd lower_duals;
  Eigen::VectorXd upper_duals;

  Eigen::VectorXd ray;  // Unbounded: direction improving the stated sense
  LpFarkas farkas;      // Infeasible

  double duality_gap = 0.0;
  double primal_residual = 0.0;  // residuals of the standard-form system
  double dual_residual = 0.0;
  int iterations = 0;
  std::string message;
};

LpSolution solve_lp(const LinearProgram& lp, const SolverOptions& options = {});

}  // namespace arbbounds
