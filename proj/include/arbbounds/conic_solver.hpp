#pragma once

// Dense interior-point solver for conic programs in standard form
//
//   (P)  minimize   <c, x>    subject to  <a_i, x> = b_i,  x in K
//   (D)  maximize   b'y       subject to  sum_i y_i a_i + s = c,  s in K
//
// where K is a product of a nonnegative orthant and dense PSD blocks.
// The solver runs a homogeneous self-dual embedding with Nesterov-Todd
// scaling and a Mehrotra predictor-corrector step, so it either converges
// to an optimal primal-dual pair or produces a certificate of primal
// infeasibility (Farkas dual ray) or dual infeasibility (primal ray).
//
// Everything is deterministic: no randomization, no threading, identical
// results for identical inputs.

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace arbbounds {

enum class SolveStatus {
  Optimal,           // primal-dual pair within tolerance
  Infeasible,        // primal infeasible, dual ray available
  Unbounded,         // primal unbounded below, primal ray available
  NumericalFailure,  // iteration cap or stall; diagnostics in message
};

const char* to_string(SolveStatus status);

// Cartesian product cone: `nonneg` orthant coordinates followed by dense
// symmetric PSD blocks of the given side lengths.
struct ConeSpec {
  int nonneg = 0;
  std::vector<int> psd;

  int barrier_degree() const;  // nonneg + sum of psd sides
  bool empty() const { return nonneg == 0 && psd.empty(); }
};

// Point in the ambient space of a ConeSpec: one vector for the orthant
// part and one dense symmetric matrix per PSD block.
struct BlockVec {
  Eigen::VectorXd orth;
  std::vector<Eigen::MatrixXd> psd;

  static BlockVec zeros(const ConeSpec& cone);
  static BlockVec identity(const ConeSpec& cone);  // orthant ones, unit matrices

  void setZero();
  void axpy(double alpha, const BlockVec& other);  // this += alpha * other
  double dot(const BlockVec& other) const;         // trace inner product
  double inf_norm() const;
};

// Sparse symmetric coefficient of one trace equality <a, x> = b or of the
// objective. Orthant entries are (index, value); PSD entries address the
// upper triangle (row <= col) of one block and stand for the symmetric
// pair, so <a, x> sums value * x for diagonal entries and 2 * value * x
// for off-diagonal ones.
struct ConstraintCoeffs {
  struct OrthEntry {
    int index;
    double value;
  };
  struct PsdEntry {
    int block;
    int row, col;  // row <= col
    double value;
  };

  std::vector<OrthEntry> orth;
  std::vector<PsdEntry> psd;

  double dot(const BlockVec& x) const;
  // this accumulated into a dense BlockVec: target += alpha * this
  void add_to(BlockVec& target, double alpha) const;
};

struct ConicProblem {
  ConeSpec cone;
  ConstraintCoeffs objective;
  std::vector<ConstraintCoeffs> rows;
  Eigen::VectorXd rhs;

  // Throws std::invalid_argument on dimension or index violations.
  void validate() const;
};

struct SolverOptions {
  double tolerance = 1e-8;  // feasibility residuals and absolute duality gap
  int max_iterations = 200;
  int stall_limit = 20;     // iterations without measurable progress
  double step_fraction = 0.99;
  bool verbose = false;
};

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;

  // Optimal: primal x, dual (y, s), objectives and residuals all filled.
  // Infeasible: y and s hold the Farkas ray (b'y > 0, sum y_i a_i + s = 0,
  //   s in K); x is the last iterate, unscaled.
  // Unbounded: x holds the primal ray (x in K, Ax ~ 0, <c, x> < 0).
  // NumericalFailure: last iterate after division by tau, for diagnostics.
  BlockVec x;
  Eigen::VectorXd y;
  BlockVec s;

  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double duality_gap = 0.0;     // |primal - dual|, absolute
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  std::string message;
};

ConicSolution solve_conic(const ConicProblem& problem,
                          const SolverOptions& options = {});

// Indexing helpers shared by the adapters: symmetric matrices are stored
// column-major over the upper triangle, (0,0), (0,1), (1,1), (0,2), ...
int svec_size(int dim);
int svec_index(int row, int col, int dim);  // row <= col

}  // namespace arbbounds
