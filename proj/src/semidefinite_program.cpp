#include "arbbounds/semidefinite_program.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace arbbounds {

namespace {

void require_symmetric(const Eigen::MatrixXd& m, int dim, const char* what) {
  if (m.rows() != dim || m.cols() != dim)
    throw std::invalid_argument(std::string(what) + ": wrong dimensions");
  if (!m.allFinite())
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw std::invalid_argument(std::string(what) + ": matrix is not symmetric");
}

// Trace-form coefficients of a symmetric matrix on one cone block.
void add_trace_coeffs(ConstraintCoeffs& row, int block, const Eigen::MatrixXd& A) {
  const int d = static_cast<int>(A.rows());
  for (int c = 0; c < d; ++c)
    for (int r = 0; r <= c; ++r)
      if (A(r, c) != 0.0) row.psd.push_back({block, r, c, A(r, c)});
}

// Entry (row, col) of the matrix variable for a given svec index, inverting
// the column-major upper-triangle layout.
std::pair<int, int> svec_entry(int k) {
  int c = 0;
  while (svec_size(c + 1) <= k) ++c;
  return {k - svec_size(c), c};
}

// The conic form shared by the solver path and certificate verification.
// Block 0 is X; each affine constraint gets one PSD slack block, pinned
// entrywise to G_0 + sum_k z_k G_k by equality rows.
ConicProblem to_conic(const SemidefiniteProgram& sdp, double sense_sign) {
  ConicProblem cp;
  cp.cone.psd.push_back(sdp.dim);
  for (const auto& lmi : sdp.lmis)
    cp.cone.psd.push_back(static_cast<int>(lmi.constant.rows()));

  add_trace_coeffs(cp.objective, 0, sense_sign * sdp.objective);

  std::vector<double> rhs;
  for (const auto& [A, b] : sdp.equalities) {
    ConstraintCoeffs row;
    add_trace_coeffs(row, 0, A);
    cp.rows.push_back(std::move(row));
    rhs.push_back(b);
  }

  // Decision scalar k is the single entry X(r_k, c_k); in trace form an
  // off-diagonal entry carries half weight.
  auto entry_coeff = [](ConstraintCoeffs& row, int block, int r, int c, double v) {
    if (v == 0.0) return;
    row.psd.push_back({block, r, c, r == c ? v : 0.5 * v});
  };

  for (size_t l = 0; l < sdp.lmis.size(); ++l) {
    const LmiConstraint& lmi = sdp.lmis[l];
    const int dl = static_cast<int>(lmi.constant.rows());
    const int block = 1 + static_cast<int>(l);
    for (int q = 0; q < dl; ++q) {
      for (int p = 0; p <= q; ++p) {
        ConstraintCoeffs row;
        for (const auto& [k, G] : lmi.terms) {
          auto [r, c] = svec_entry(k);
          entry_coeff(row, 0, r, c, G(p, q));
        }
        entry_coeff(row, block, p, q, -1.0);
        cp.rows.push_back(std::move(row));
        rhs.push_back(-lmi.constant(p, q));
      }
    }
  }
  cp.rhs = Eigen::Map<const Eigen::VectorXd>(rhs.data(),
                                             static_cast<Eigen::Index>(rhs.size()));
  return cp;
}

}  // namespace

void SemidefiniteProgram::validate() const {
  if (dim < 1) throw std::invalid_argument("matrix variable dimension must be positive");
  require_symmetric(objective, dim, "objective");
  for (const auto& [A, b] : equalities) {
    require_symmetric(A, dim, "equality constraint");
    if (!std::isfinite(b))
      throw std::invalid_argument("equality right-hand side is not finite");
  }
  const int nz = svec_size(dim);
  for (const auto& lmi : lmis) {
    const int dl = static_cast<int>(lmi.constant.rows());
    require_symmetric(lmi.constant, dl, "affine constraint constant");
    for (const auto& [k, G] : lmi.terms) {
      if (k < 0 || k >= nz)
        throw std::invalid_argument("affine constraint refers to a scalar out of range");
      require_symmetric(G, dl, "affine constraint term");
    }
  }
}

SdpSolution solve_sdp(const SemidefiniteProgram& sdp, const SolverOptions& options) {
  sdp.validate();
  const double sense_sign = sdp.sense == Sense::Maximize ? -1.0 : 1.0;
  const int m_eq = static_cast<int>(sdp.equalities.size());

  ConicProblem cp = to_conic(sdp, sense_sign);
  ConicSolution cs = solve_conic(cp, options);

  SdpSolution out;
  out.status = cs.status;
  out.duality_gap = cs.duality_gap;
  out.primal_residual = cs.primal_residual;
  out.dual_residual = cs.dual_residual;
  out.iterations = cs.iterations;
  out.message = cs.message;

  switch (cs.status) {
    case SolveStatus::Optimal:
      out.X = cs.x.psd[0];
      out.objective = sense_sign * cs.primal_objective;
      out.eq_duals = cs.y.head(m_eq);
      break;
    case SolveStatus::Infeasible:
      out.farkas = cs.y;
      break;
    case SolveStatus::Unbounded:
      out.ray = cs.x.psd[0];
      break;
    case SolveStatus::NumericalFailure:
      out.X = cs.x.psd[0];
      out.objective = sense_sign * cs.primal_objective;
      break;
  }
  return out;
}

std::pair<double, double> sdp_farkas_residual(const SemidefiniteProgram& sdp,
                                              const Eigen::VectorXd& farkas) {
  // A certificate is a dual ray of the conic form: -A'y PSD blockwise with
  // b'y > 0. Rebuild the same conic problem and measure both quantities.
  ConicProblem cp = to_conic(sdp, sdp.sense == Sense::Maximize ? -1.0 : 1.0);
  if (farkas.size() != cp.rhs.size())
    throw std::invalid_argument("certificate length does not match the constraint rows");

  BlockVec aty = BlockVec::zeros(cp.cone);
  for (size_t i = 0; i < cp.rows.size(); ++i) cp.rows[i].add_to(aty, -farkas[i]);

  double margin = std::numeric_limits<double>::infinity();
  for (const auto& blk : aty.psd) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(blk, Eigen::EigenvaluesOnly);
    margin = std::min(margin, eig.eigenvalues().minCoeff());
  }
  return {margin, cp.rhs.dot(farkas)};
}

}  // namespace arbbounds
