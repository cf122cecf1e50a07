#pragma once

// Semidefinite programs with one symmetric matrix variable X,
//
//   min or max  Tr(C X)
//   subject to  Tr(A_i X) = b_i,
//               G_0 + sum_k z_k G_k  PSD   (optional affine constraints),
//               X PSD,
//
// where z is the vector of decision scalars: the entries of X on the upper
// triangle in column-major order, z_k = X(r_k, c_k) with k = svec_index.
// Affine constraints get a PSD slack block each; everything is handed to the
// conic solver and mapped back.

#include "arbbounds/conic_solver.hpp"
#include "arbbounds/linear_program.hpp"  // Sense

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace arbbounds {

struct LmiConstraint {
  Eigen::MatrixXd constant;                            // G_0
  std::vector<std::pair<int, Eigen::MatrixXd>> terms;  // (svec index, G_k)
};

struct SemidefiniteProgram {
  int dim = 0;  // side length of X
  Sense sense = Sense::Minimize;
  Eigen::MatrixXd objective;  // C, symmetric
  std::vector<std::pair<Eigen::MatrixXd, double>> equalities;  // Tr(A X) = b
  std::vector<LmiConstraint> lmis;

  // Throws std::invalid_argument on asymmetric matrices, dimension
  // mismatches, or svec indices out of range.
  void validate() const;
};

struct SdpSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  double objective = 0.0;

  Eigen::MatrixXd X;          // Optimal: the matrix variable
  Eigen::VectorXd eq_duals;   // multipliers of the minimization form

  // Infeasible: normalized dual ray over all conic rows (equalities first,
  // then the svec-ordered rows of each affine constraint); check it with
  // sdp_farkas_residual.
  Eigen::VectorXd farkas;

  Eigen::MatrixXd ray;  // Unbounded: PSD direction improving the stated sense

  double duality_gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  std::string message;
};

SdpSolution solve_sdp(const SemidefiniteProgram& sdp, const SolverOptions& options = {});

// Validity of an infeasibility certificate: returns (eigenvalue margin,
// objective of the ray). A valid certificate makes every block of -A'y PSD
// up to the margin (first value >= -eps) while b'y stays positive (second
// value > 0), which contradicts feasibility.
std::pair<double, double> sdp_farkas_residual(const SemidefiniteProgram& sdp,
                                              const Eigen::VectorXd& farkas);

}  // namespace arbbounds
