#include "arbbounds/conic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace arbbounds {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ============================================================================
// Nesterov-Todd scaling
//
// For each PSD block, with X = Lx Lx', S = Ls Ls' and Ls' Lx = U Sigma V',
// the scaling point satisfies W = R R', R = Lx V Sigma^{-1/2}, and both
// iterates become the same diagonal in scaled coordinates:
// Rinv X Rinv' = R' S R = Sigma. The orthant cases are the scalar analogue.
// ============================================================================

struct PsdScaling {
  Eigen::MatrixXd R;
  Eigen::MatrixXd Rinv;
  Eigen::MatrixXd W;  // R R'
  Eigen::VectorXd lambda;
};

struct Scaling {
  Eigen::VectorXd w;            // orthant scaling, w_i = sqrt(x_i / s_i)
  Eigen::VectorXd lambda_orth;  // sqrt(x_i s_i)
  std::vector<PsdScaling> blocks;
};

// Cholesky with a small escalating ridge; interior iterates can brush the
// boundary late in the run.
bool robust_llt(const Eigen::MatrixXd& mat, Eigen::LLT<Eigen::MatrixXd>& llt) {
  llt.compute(mat);
  if (llt.info() == Eigen::Success) return true;
  const int d = static_cast<int>(mat.rows());
  double scale = std::max(1.0, mat.diagonal().cwiseAbs().maxCoeff());
  double ridge = 1e-14 * scale;
  for (int attempt = 0; attempt < 4; ++attempt) {
    Eigen::MatrixXd shifted = mat + ridge * Eigen::MatrixXd::Identity(d, d);
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) return true;
    ridge *= 100.0;
  }
  return false;
}

bool compute_scaling(const ConeSpec& cone, const BlockVec& x, const BlockVec& s,
                     Scaling& scal) {
  if (cone.nonneg > 0) {
    scal.w = (x.orth.array() / s.orth.array()).sqrt();
    scal.lambda_orth = (x.orth.array() * s.orth.array()).sqrt();
    if (!scal.w.allFinite() || !scal.lambda_orth.allFinite()) return false;
  } else {
    scal.w.resize(0);
    scal.lambda_orth.resize(0);
  }
  scal.blocks.resize(cone.psd.size());
  for (size_t b = 0; b < cone.psd.size(); ++b) {
    Eigen::LLT<Eigen::MatrixXd> lltx, llts;
    if (!robust_llt(x.psd[b], lltx) || !robust_llt(s.psd[b], llts)) return false;
    Eigen::MatrixXd Lx = lltx.matrixL();
    Eigen::MatrixXd Ls = llts.matrixL();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Ls.transpose() * Lx,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sig = svd.singularValues();
    if (sig.minCoeff() <= 0.0) return false;
    Eigen::VectorXd sig_isqrt = sig.array().sqrt().inverse();
    PsdScaling& blk = scal.blocks[b];
    blk.R.noalias() = Lx * svd.matrixV() * sig_isqrt.asDiagonal();
    blk.Rinv.noalias() = sig_isqrt.asDiagonal() * svd.matrixU().transpose() * Ls.transpose();
    blk.W.noalias() = blk.R * blk.R.transpose();
    blk.lambda = sig;
  }
  return true;
}

// ============================================================================
// Linear operators
// ============================================================================

Eigen::VectorXd apply_A(const ConicProblem& p, const BlockVec& v) {
  Eigen::VectorXd out(p.rows.size());
  for (size_t i = 0; i < p.rows.size(); ++i) out[i] = p.rows[i].dot(v);
  return out;
}

BlockVec apply_At(const ConicProblem& p, const Eigen::VectorXd& y) {
  BlockVec out = BlockVec::zeros(p.cone);
  for (size_t i = 0; i < p.rows.size(); ++i) p.rows[i].add_to(out, y[i]);
  return out;
}

// W v W over all blocks (w^2-weighted for the orthant).
BlockVec apply_W2(const Scaling& scal, const BlockVec& v) {
  BlockVec out = v;
  if (out.orth.size() > 0)
    out.orth.array() *= scal.w.array().square();
  for (size_t b = 0; b < out.psd.size(); ++b) {
    const Eigen::MatrixXd& W = scal.blocks[b].W;
    Eigen::MatrixXd tmp = W * v.psd[b];
    out.psd[b].noalias() = tmp * W;
  }
  return out;
}

// Scaled primal coordinates: Rinv v Rinv' per block, v / w on the orthant.
BlockVec to_scaled_x(const Scaling& scal, const BlockVec& v) {
  BlockVec out = v;
  if (out.orth.size() > 0) out.orth.array() /= scal.w.array();
  for (size_t b = 0; b < out.psd.size(); ++b) {
    const Eigen::MatrixXd& Rinv = scal.blocks[b].Rinv;
    Eigen::MatrixXd tmp = Rinv * v.psd[b];
    out.psd[b].noalias() = tmp * Rinv.transpose();
  }
  return out;
}

// Pull a scaled-space symmetric target back to dual coordinates:
// Rinv' t Rinv per block, t / w on the orthant.
BlockVec unscale_to_dual(const Scaling& scal, const BlockVec& t) {
  BlockVec out = t;
  if (out.orth.size() > 0) out.orth.array() /= scal.w.array();
  for (size_t b = 0; b < out.psd.size(); ++b) {
    const Eigen::MatrixXd& Rinv = scal.blocks[b].Rinv;
    Eigen::MatrixXd tmp = Rinv.transpose() * t.psd[b];
    out.psd[b].noalias() = tmp * Rinv;
  }
  return out;
}

// Push a dual-space vector into scaled coordinates: R' v R per block,
// w .* v on the orthant (so the scaled iterate S maps to Lambda).
BlockVec to_scaled_dual(const Scaling& scal, const BlockVec& v) {
  BlockVec out = v;
  if (out.orth.size() > 0) out.orth.array() *= scal.w.array();
  for (size_t b = 0; b < out.psd.size(); ++b) {
    const Eigen::MatrixXd& R = scal.blocks[b].R;
    Eigen::MatrixXd tmp = R.transpose() * v.psd[b];
    out.psd[b].noalias() = tmp * R;
  }
  return out;
}

// ============================================================================
// Normal matrix M = A W^2 A'
// ============================================================================

// Rows regrouped per PSD block so the assembly touches only relevant rows.
struct BlockRows {
  std::vector<int> row;                                        // ascending
  std::vector<std::vector<ConstraintCoeffs::PsdEntry>> entries;
};

std::vector<BlockRows> group_rows_by_block(const ConicProblem& p) {
  std::vector<BlockRows> out(p.cone.psd.size());
  for (size_t i = 0; i < p.rows.size(); ++i) {
    for (const auto& e : p.rows[i].psd) {
      BlockRows& br = out[e.block];
      if (br.row.empty() || br.row.back() != static_cast<int>(i)) {
        br.row.push_back(static_cast<int>(i));
        br.entries.emplace_back();
      }
      br.entries.back().push_back(e);
    }
  }
  return out;
}

Eigen::MatrixXd assemble_normal_matrix(const ConicProblem& p,
                                       const std::vector<BlockRows>& grouped,
                                       const Scaling& scal) {
  const int m = static_cast<int>(p.rows.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);

  if (p.cone.nonneg > 0) {
    Eigen::VectorXd w2 = scal.w.array().square();
    Eigen::VectorXd work = Eigen::VectorXd::Zero(p.cone.nonneg);
    for (int i = 0; i < m; ++i) {
      const auto& oi = p.rows[i].orth;
      if (oi.empty()) continue;
      for (const auto& e : oi) work[e.index] += w2[e.index] * e.value;
      for (int j = i; j < m; ++j) {
        double acc = 0.0;
        for (const auto& e : p.rows[j].orth) acc += e.value * work[e.index];
        M(j, i) += acc;
      }
      for (const auto& e : oi) work[e.index] = 0.0;
    }
  }

  for (size_t b = 0; b < grouped.size(); ++b) {
    const BlockRows& br = grouped[b];
    if (br.row.empty()) continue;
    const Eigen::MatrixXd& W = scal.blocks[b].W;
    const int d = static_cast<int>(W.rows());
    Eigen::MatrixXd T(d, d);
    for (size_t ii = 0; ii < br.row.size(); ++ii) {
      T.setZero();
      for (const auto& e : br.entries[ii]) {
        T.noalias() += e.value * W.col(e.row) * W.col(e.col).transpose();
        if (e.row != e.col)
          T.noalias() += e.value * W.col(e.col) * W.col(e.row).transpose();
      }
      for (size_t jj = ii; jj < br.row.size(); ++jj) {
        double acc = 0.0;
        for (const auto& e : br.entries[jj]) {
          double t = T(e.row, e.col);
          acc += e.value * (e.row == e.col ? t : 2.0 * t);
        }
        M(br.row[jj], br.row[ii]) += acc;
      }
    }
  }

  M = M.template selfadjointView<Eigen::Lower>();
  return M;
}

// ============================================================================
// Step length to the cone boundary, computed in scaled coordinates where
// the current iterate is the diagonal lambda.
// ============================================================================

double vector_boundary_step(const Eigen::VectorXd& lambda, const Eigen::VectorXd& d) {
  double alpha = kInfinity;
  for (Eigen::Index i = 0; i < lambda.size(); ++i)
    if (d[i] < 0.0) alpha = std::min(alpha, -lambda[i] / d[i]);
  return alpha;
}

double cone_boundary_step(const Scaling& scal, const BlockVec& dxi) {
  double alpha = kInfinity;
  if (scal.lambda_orth.size() > 0)
    alpha = std::min(alpha, vector_boundary_step(scal.lambda_orth, dxi.orth));
  for (size_t b = 0; b < dxi.psd.size(); ++b) {
    const Eigen::VectorXd& lam = scal.blocks[b].lambda;
    Eigen::VectorXd lam_isqrt = lam.array().sqrt().inverse();
    Eigen::MatrixXd scaled =
        lam_isqrt.asDiagonal() * dxi.psd[b] * lam_isqrt.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(scaled,
                                                       Eigen::EigenvaluesOnly);
    double rho = eig.eigenvalues().minCoeff();
    if (rho < 0.0) alpha = std::min(alpha, -1.0 / rho);
  }
  return alpha;
}

// ============================================================================
// Newton direction for the homogeneous system, by block elimination through
// the normal equations. The rows being solved, with residual weight eta and
// scaled complementarity target t (and scalar target r5 for the tau-kappa
// pair), are
//
//   A dx - b dtau                = -eta (A x - b tau)
//   A'dy + ds - c dtau           = -eta (A'y + s - c tau)
//   c'dx - b'dy + dkappa         = -eta (c'x - b'y + kappa)
//   scaled(dx) + scaled(ds)      = t
//   tau dkappa + kappa dtau      = r5
// ============================================================================

struct Direction {
  BlockVec dx, ds, dxi, deta;
  Eigen::VectorXd dy;
  double dtau = 0.0, dkappa = 0.0;
};

struct IterationWork {
  Scaling scal;
  Eigen::MatrixXd M;     // A W^2 A', kept for iterative refinement
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd f1;    // M^{-1} (A W^2 c + b)
  BlockVec W2c;
  BlockVec g1;           // W^2 A' f1 - W^2 c
  double denom = 0.0;    // c'g1 - b'f1 - kappa/tau, strictly negative

  // Iterative refinement keeps the normal-equation error from contaminating
  // the search direction when M turns ill conditioned near convergence.
  // Residuals are accumulated in extended precision so the double Cholesky
  // factor keeps working as a preconditioner well past the conditioning at
  // which double residuals go blind; degenerate optima need this.
  Eigen::VectorXd residual_extended(const Eigen::VectorXd& rhs,
                                    const Eigen::VectorXd& sol) const {
    const Eigen::Index n = rhs.size();
    std::vector<long double> acc(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) acc[i] = rhs[i];
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        const long double v = M(i, j);
        acc[i] -= v * static_cast<long double>(sol[j]);
        acc[j] -= v * static_cast<long double>(sol[i]);
      }
      acc[i] -= static_cast<long double>(M(i, i)) * sol[i];
    }
    Eigen::VectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = static_cast<double>(acc[i]);
    return r;
  }

  Eigen::VectorXd solve_refined(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd sol = llt.solve(rhs);
    Eigen::VectorXd best = sol;
    double best_norm = kInfinity;
    for (int round = 0; round < 7; ++round) {
      Eigen::VectorXd residual = residual_extended(rhs, sol);
      const double rnorm =
          residual.size() > 0 ? residual.cwiseAbs().maxCoeff() : 0.0;
      const bool improved = rnorm < best_norm;
      if (improved) {
        best = sol;
        best_norm = rnorm;
      }
      if (!improved || rnorm == 0.0 || round == 6) break;
      sol += llt.solve(residual);
    }
    return best;
  }
};

Direction solve_direction(const ConicProblem& p, const IterationWork& work,
                          const BlockVec& c_vec, const Eigen::VectorXd& b,
                          double eta, const Eigen::VectorXd& rp,
                          const BlockVec& rd, double rg, const BlockVec& t,
                          double r5, double tau, double kappa) {
  Direction dir;
  BlockVec E = unscale_to_dual(work.scal, t);
  BlockVec H = E;
  H.axpy(eta, rd);
  BlockVec W2H = apply_W2(work.scal, H);
  Eigen::VectorXd v = -eta * rp - apply_A(p, W2H);
  Eigen::VectorXd f2 = work.solve_refined(v);

  BlockVec g2 = apply_W2(work.scal, apply_At(p, f2));
  g2.axpy(1.0, W2H);

  double numer = -eta * rg - c_vec.dot(g2) + b.dot(f2) - r5 / tau;
  dir.dtau = numer / work.denom;
  dir.dy = work.f1 * dir.dtau + f2;
  dir.dx = g2;
  dir.dx.axpy(dir.dtau, work.g1);
  dir.dkappa = (r5 - kappa * dir.dtau) / tau;

  dir.dxi = to_scaled_x(work.scal, dir.dx);
  // The dual direction is read off the dual feasibility row, so that row is
  // satisfied to rounding error after the step; the normal-equation error
  // lands in the complementarity equation where it only perturbs centering.
  dir.ds = BlockVec::zeros(p.cone);
  dir.ds.axpy(-eta, rd);
  dir.ds.axpy(-1.0, apply_At(p, dir.dy));
  dir.ds.axpy(dir.dtau, c_vec);
  dir.deta = to_scaled_dual(work.scal, dir.ds);
  return dir;
}

double scaled_pair_trace(const Scaling& scal, const BlockVec& a, const BlockVec& b,
                         double alpha) {
  // <Lambda + alpha a, Lambda + alpha b> over all blocks; a, b are scaled
  // directions so the iterate itself is the diagonal lambda.
  double total = 0.0;
  if (scal.lambda_orth.size() > 0) {
    Eigen::ArrayXd xa = scal.lambda_orth.array() + alpha * a.orth.array();
    Eigen::ArrayXd xb = scal.lambda_orth.array() + alpha * b.orth.array();
    total += (xa * xb).sum();
  }
  for (size_t k = 0; k < a.psd.size(); ++k) {
    const Eigen::VectorXd& lam = scal.blocks[k].lambda;
    Eigen::MatrixXd ma = alpha * a.psd[k];
    ma += lam.asDiagonal();
    Eigen::MatrixXd mb = alpha * b.psd[k];
    mb += lam.asDiagonal();
    total += (ma.array() * mb.array()).sum();
  }
  return total;
}

// Target t for the corrector in scaled space: per entry pair,
// t = 2 (sigma mu I - Lambda^2 - sym(dxi deta)) / (lambda_i + lambda_j).
BlockVec corrector_target(const Scaling& scal, double sigma_mu,
                          const Direction& aff) {
  BlockVec t;
  if (scal.lambda_orth.size() > 0) {
    t.orth = (sigma_mu - scal.lambda_orth.array().square() -
              aff.dxi.orth.array() * aff.deta.orth.array()) /
             scal.lambda_orth.array();
  }
  t.psd.resize(scal.blocks.size());
  for (size_t b = 0; b < scal.blocks.size(); ++b) {
    const Eigen::VectorXd& lam = scal.blocks[b].lambda;
    const int d = static_cast<int>(lam.size());
    Eigen::MatrixXd prod = aff.dxi.psd[b] * aff.deta.psd[b];
    Eigen::MatrixXd rhs = -0.5 * (prod + prod.transpose());
    rhs.diagonal().array() += sigma_mu;
    rhs.diagonal() -= lam.array().square().matrix();
    Eigen::MatrixXd& tb = t.psd[b];
    tb.resize(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) tb(i, j) = 2.0 * rhs(i, j) / (lam[i] + lam[j]);
  }
  return t;
}

std::string format_diagnostics(double pres, double dres, double gap, double mu,
                               int iterations) {
  std::ostringstream os;
  os << "primal residual " << pres << ", dual residual " << dres
     << ", duality gap " << gap << ", mu " << mu << ", iterations "
     << iterations;
  return os.str();
}

// Problems with no equality rows are decided directly: the optimum is 0 when
// c is in the dual cone, otherwise any violating direction is a primal ray.
ConicSolution solve_without_rows(const ConicProblem& p) {
  ConicSolution sol;
  sol.y.resize(0);
  BlockVec c_vec = BlockVec::zeros(p.cone);
  p.objective.add_to(c_vec, 1.0);

  if (c_vec.orth.size() > 0) {
    Eigen::Index worst;
    if (c_vec.orth.size() > 0 && c_vec.orth.minCoeff(&worst) < 0.0) {
      sol.status = SolveStatus::Unbounded;
      sol.x = BlockVec::zeros(p.cone);
      sol.x.orth[worst] = 1.0 / -c_vec.orth[worst];
      sol.s = BlockVec::zeros(p.cone);
      sol.message = "objective decreases along an orthant direction";
      return sol;
    }
  }
  for (size_t b = 0; b < c_vec.psd.size(); ++b) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c_vec.psd[b]);
    double lmin = eig.eigenvalues().minCoeff();
    if (lmin < 0.0) {
      Eigen::Index idx;
      eig.eigenvalues().minCoeff(&idx);
      Eigen::VectorXd vec = eig.eigenvectors().col(idx);
      sol.status = SolveStatus::Unbounded;
      sol.x = BlockVec::zeros(p.cone);
      sol.x.psd[b].noalias() = vec * vec.transpose() / -lmin;
      sol.s = BlockVec::zeros(p.cone);
      sol.message = "objective decreases along a rank-one direction";
      return sol;
    }
  }

  sol.status = SolveStatus::Optimal;
  sol.x = BlockVec::zeros(p.cone);
  sol.s = c_vec;
  sol.primal_objective = 0.0;
  sol.dual_objective = 0.0;
  sol.duality_gap = 0.0;
  sol.message = "no equality rows; optimum attained at the cone vertex";
  return sol;
}

}  // namespace

// ============================================================================
// Public types
// ============================================================================

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "Unknown";
}

int ConeSpec::barrier_degree() const {
  int nu = nonneg;
  for (int d : psd) nu += d;
  return nu;
}

BlockVec BlockVec::zeros(const ConeSpec& cone) {
  BlockVec v;
  v.orth = Eigen::VectorXd::Zero(cone.nonneg);
  v.psd.reserve(cone.psd.size());
  for (int d : cone.psd) v.psd.push_back(Eigen::MatrixXd::Zero(d, d));
  return v;
}

BlockVec BlockVec::identity(const ConeSpec& cone) {
  BlockVec v;
  v.orth = Eigen::VectorXd::Ones(cone.nonneg);
  v.psd.reserve(cone.psd.size());
  for (int d : cone.psd) v.psd.push_back(Eigen::MatrixXd::Identity(d, d));
  return v;
}

void BlockVec::setZero() {
  orth.setZero();
  for (auto& m : psd) m.setZero();
}

void BlockVec::axpy(double alpha, const BlockVec& other) {
  if (orth.size() > 0) orth += alpha * other.orth;
  for (size_t b = 0; b < psd.size(); ++b) psd[b] += alpha * other.psd[b];
}

double BlockVec::dot(const BlockVec& other) const {
  double total = orth.size() > 0 ? orth.dot(other.orth) : 0.0;
  for (size_t b = 0; b < psd.size(); ++b)
    total += (psd[b].array() * other.psd[b].array()).sum();
  return total;
}

double BlockVec::inf_norm() const {
  double v = orth.size() > 0 ? orth.cwiseAbs().maxCoeff() : 0.0;
  for (const auto& m : psd)
    if (m.size() > 0) v = std::max(v, m.cwiseAbs().maxCoeff());
  return v;
}

double ConstraintCoeffs::dot(const BlockVec& x) const {
  double total = 0.0;
  for (const auto& e : orth) total += e.value * x.orth[e.index];
  for (const auto& e : psd) {
    double v = e.value * x.psd[e.block](e.row, e.col);
    total += e.row == e.col ? v : 2.0 * v;
  }
  return total;
}

void ConstraintCoeffs::add_to(BlockVec& target, double alpha) const {
  for (const auto& e : orth) target.orth[e.index] += alpha * e.value;
  for (const auto& e : psd) {
    target.psd[e.block](e.row, e.col) += alpha * e.value;
    if (e.row != e.col) target.psd[e.block](e.col, e.row) += alpha * e.value;
  }
}

void ConicProblem::validate() const {
  for (int d : cone.psd)
    if (d < 1) throw std::invalid_argument("PSD block dimension must be positive");
  if (cone.nonneg < 0) throw std::invalid_argument("negative orthant dimension");
  if (static_cast<size_t>(rhs.size()) != rows.size())
    throw std::invalid_argument("right-hand side length does not match row count");
  if (!rhs.allFinite())
    throw std::invalid_argument("right-hand side contains non-finite values");
  auto check = [&](const ConstraintCoeffs& cc, const char* what) {
    for (const auto& e : cc.orth) {
      if (e.index < 0 || e.index >= cone.nonneg)
        throw std::invalid_argument(std::string(what) + ": orthant index out of range");
      if (!std::isfinite(e.value))
        throw std::invalid_argument(std::string(what) + ": non-finite coefficient");
    }
    for (const auto& e : cc.psd) {
      if (e.block < 0 || e.block >= static_cast<int>(cone.psd.size()))
        throw std::invalid_argument(std::string(what) + ": PSD block index out of range");
      if (e.row < 0 || e.col < e.row || e.col >= cone.psd[e.block])
        throw std::invalid_argument(std::string(what) + ": PSD entry out of range");
      if (!std::isfinite(e.value))
        throw std::invalid_argument(std::string(what) + ": non-finite coefficient");
    }
  };
  check(objective, "objective");
  for (const auto& row : rows) check(row, "constraint");
}

int svec_size(int dim) { return dim * (dim + 1) / 2; }

int svec_index(int row, int col, int dim) {
  if (row > col || col >= dim || row < 0)
    throw std::invalid_argument("svec_index: need 0 <= row <= col < dim");
  return col * (col + 1) / 2 + row;
}

// ============================================================================
// Main loop
// ============================================================================

ConicSolution solve_conic(const ConicProblem& problem, const SolverOptions& options) {
  problem.validate();

  const int m = static_cast<int>(problem.rows.size());
  if (problem.cone.empty()) {
    // No variables at all: the rows read 0 = b.
    ConicSolution sol;
    sol.x = BlockVec::zeros(problem.cone);
    sol.s = BlockVec::zeros(problem.cone);
    if (m == 0 || problem.rhs.cwiseAbs().maxCoeff() <= options.tolerance) {
      sol.status = SolveStatus::Optimal;
      sol.y = Eigen::VectorXd::Zero(m);
      sol.message = "empty cone";
    } else {
      sol.status = SolveStatus::Infeasible;
      sol.y = problem.rhs / problem.rhs.squaredNorm();
      sol.message = "empty cone with nonzero right-hand side";
    }
    return sol;
  }
  if (m == 0) return solve_without_rows(problem);

  BlockVec c_vec = BlockVec::zeros(problem.cone);
  problem.objective.add_to(c_vec, 1.0);
  const Eigen::VectorXd& b = problem.rhs;
  const double bnorm = m > 0 ? b.cwiseAbs().maxCoeff() : 0.0;
  const double cnorm = c_vec.inf_norm();
  const double nu = static_cast<double>(problem.cone.barrier_degree());

  const std::vector<BlockRows> grouped = group_rows_by_block(problem);

  BlockVec x = BlockVec::identity(problem.cone);
  BlockVec s = BlockVec::identity(problem.cone);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  double tau = 1.0, kappa = 1.0;

  ConicSolution sol;
  sol.y = y;

  double best_merit = kInfinity, best_mu = kInfinity;
  int since_progress = 0;

  // Stalls and step collapses routinely destroy an almost-converged point,
  // so the failure report is built from the best iterate seen, not from
  // whatever state the breakdown left behind.
  struct {
    BlockVec x, s;
    Eigen::VectorXd y;
    double tau = 1.0;
    double pres = kInfinity, dres = kInfinity, gap = kInfinity;
    double mu = kInfinity;
    int iter = -1;
    double merit = kInfinity;
    bool valid = false;
  } best;

  auto fill_failure = [&](const std::string& reason, double pres, double dres,
                          double gap, double mu, int iter) {
    sol.status = SolveStatus::NumericalFailure;
    const BlockVec& rx = best.valid ? best.x : x;
    const BlockVec& rs = best.valid ? best.s : s;
    const Eigen::VectorXd& ry = best.valid ? best.y : y;
    const double rtau = best.valid ? best.tau : tau;
    sol.x = rx;
    sol.s = rs;
    sol.y = ry;
    if (rtau > 0.0) {
      sol.x.axpy(1.0 / rtau - 1.0, rx);
      sol.s.axpy(1.0 / rtau - 1.0, rs);
      sol.y /= rtau;
    }
    sol.primal_objective = problem.objective.dot(sol.x);
    sol.dual_objective = b.dot(sol.y);
    sol.duality_gap = std::abs(sol.primal_objective - sol.dual_objective);
    sol.primal_residual = best.valid ? best.pres : pres;
    sol.dual_residual = best.valid ? best.dres : dres;
    sol.iterations = iter;
    sol.message = reason;
    // tau and kappa vanishing together is the signature of an instance with
    // no strict certificate: weakly infeasible, or an optimum approached only
    // along a curved path with no attaining ray.
    if (tau <= 1e-8 && kappa <= 1e-6) {
      sol.message += " (tau and kappa both collapsed: the instance is ill "
                     "posed, weakly infeasible, or its optimum is unattained)";
    }
    sol.message += "; " + format_diagnostics(pres, dres, gap, mu, iter);
    if (best.valid) {
      sol.message += "; best iterate: " + format_diagnostics(best.pres, best.dres,
                                                             best.gap, best.mu,
                                                             best.iter);
    }
    return sol;
  };

  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    // Residuals of the homogeneous system.
    Eigen::VectorXd rp = apply_A(problem, x) - b * tau;
    BlockVec rd = apply_At(problem, y);
    rd.axpy(1.0, s);
    rd.axpy(-tau, c_vec);
    double cx = c_vec.dot(x);
    double by = b.dot(y);
    double rg = cx - by + kappa;
    double mu = (x.dot(s) + tau * kappa) / (nu + 1.0);

    // Candidate solution after dividing out tau.
    double pobj = cx / tau;
    double dobj = by / tau;
    double gap = std::abs(pobj - dobj);
    double pres = rp.cwiseAbs().maxCoeff() / tau / (1.0 + bnorm);
    double dres = rd.inf_norm() / tau / (1.0 + cnorm);

    const double iterate_merit = std::max({pres, dres, gap});
    if (iterate_merit < best.merit) {
      best.valid = true;
      best.merit = iterate_merit;
      best.x = x;
      best.s = s;
      best.y = y;
      best.tau = tau;
      best.pres = pres;
      best.dres = dres;
      best.gap = gap;
      best.mu = mu;
      best.iter = iter;
    }

    if (options.verbose) {
      std::fprintf(stderr,
                   "iter %3d  mu %9.3e  pres %9.3e  dres %9.3e  gap %9.3e  "
                   "tau %9.3e  kappa %9.3e  |y| %9.3e\n",
                   iter, mu, pres, dres, gap, tau, kappa,
                   y.cwiseAbs().maxCoeff());
    }

    if (pres <= options.tolerance && dres <= options.tolerance &&
        gap <= options.tolerance) {
      sol.status = SolveStatus::Optimal;
      sol.x = x;
      sol.x.axpy(1.0 / tau - 1.0, x);
      sol.s = s;
      sol.s.axpy(1.0 / tau - 1.0, s);
      sol.y = y / tau;
      sol.primal_objective = pobj;
      sol.dual_objective = dobj;
      sol.duality_gap = gap;
      sol.primal_residual = pres;
      sol.dual_residual = dres;
      sol.iterations = iter;
      sol.message = "converged";
      return sol;
    }

    // Certificates. A Farkas dual ray satisfies A'y + s = 0, b'y > 0; a
    // primal ray satisfies A x = 0, <c, x> < 0. The mu guard keeps the test
    // from firing on early iterates.
    if (mu <= 1e-6) {
      if (by > 0.0) {
        BlockVec dual_ray_res = apply_At(problem, y);
        dual_ray_res.axpy(1.0, s);
        if (dual_ray_res.inf_norm() / by <= options.tolerance * (1.0 + cnorm)) {
          sol.status = SolveStatus::Infeasible;
          sol.y = y / by;
          sol.s = s;
          sol.s.axpy(1.0 / by - 1.0, s);
          sol.x = x;
          sol.iterations = iter;
          sol.message = "dual ray certifies primal infeasibility (b'y normalized to 1)";
          return sol;
        }
      }
      if (cx < 0.0) {
        double pray_res = apply_A(problem, x).cwiseAbs().maxCoeff();
        if (pray_res / -cx <= options.tolerance * (1.0 + bnorm)) {
          sol.status = SolveStatus::Unbounded;
          sol.x = x;
          sol.x.axpy(1.0 / -cx - 1.0, x);
          sol.s = BlockVec::zeros(problem.cone);
          sol.y = y;
          sol.iterations = iter;
          sol.message = "primal ray certifies unboundedness (<c, x> normalized to -1)";
          return sol;
        }
      }
    }

    if (iterate_merit < 0.9 * best_merit || mu < 0.9 * best_mu) {
      best_merit = std::min(best_merit, iterate_merit);
      best_mu = std::min(best_mu, mu);
      since_progress = 0;
    } else if (++since_progress >= options.stall_limit) {
      return fill_failure("progress stalled", pres, dres, gap, mu, iter);
    }
    if (iter == options.max_iterations) {
      return fill_failure("iteration cap reached", pres, dres, gap, mu, iter);
    }

    // Nesterov-Todd scaling and the normal matrix for this iterate.
    IterationWork work;
    if (!compute_scaling(problem.cone, x, s, work.scal)) {
      return fill_failure("scaling breakdown (iterate lost positive definiteness)",
                          pres, dres, gap, mu, iter);
    }
    work.M = assemble_normal_matrix(problem, grouped, work.scal);
    if (!robust_llt(work.M, work.llt)) {
      return fill_failure("normal matrix factorization failed", pres, dres, gap,
                          mu, iter);
    }
    work.W2c = apply_W2(work.scal, c_vec);
    Eigen::VectorXd fc = work.solve_refined(apply_A(problem, work.W2c));
    Eigen::VectorXd fb = work.solve_refined(b);
    work.f1 = fc + fb;
    work.g1 = apply_W2(work.scal, apply_At(problem, work.f1));
    work.g1.axpy(-1.0, work.W2c);
    // Algebraically denom = c'g1 - b'f1 - kappa/tau, but that form cancels
    // catastrophically once the scaling turns ill conditioned near the
    // optimum. Expanded it is -(|c - A'fc|_{W^2}^2 + b'fb + kappa/tau); the
    // quadratic term is nonnegative for any computed fc, so this form keeps
    // the sign exact on degenerate problems.
    BlockVec rc = apply_At(problem, fc);
    rc.axpy(-1.0, c_vec);
    work.denom = -(rc.dot(apply_W2(work.scal, rc)) + b.dot(fb) + kappa / tau);
    if (!(work.denom < 0.0)) {
      return fill_failure("normal equations lost definiteness", pres, dres, gap,
                          mu, iter);
    }

    // Predictor: aim at the boundary (sigma = 0) from the current point.
    BlockVec t_pred;
    t_pred.orth = -work.scal.lambda_orth;
    t_pred.psd.reserve(work.scal.blocks.size());
    for (const auto& blk : work.scal.blocks) {
      Eigen::MatrixXd tb = Eigen::MatrixXd::Zero(blk.lambda.size(), blk.lambda.size());
      tb.diagonal() = -blk.lambda;
      t_pred.psd.push_back(std::move(tb));
    }
    Direction aff = solve_direction(problem, work, c_vec, b, 1.0, rp, rd, rg,
                                    t_pred, -tau * kappa, tau, kappa);

    double alpha_aff = std::min({1.0, cone_boundary_step(work.scal, aff.dxi),
                                 cone_boundary_step(work.scal, aff.deta)});
    if (aff.dtau < 0.0) alpha_aff = std::min(alpha_aff, -tau / aff.dtau);
    if (aff.dkappa < 0.0) alpha_aff = std::min(alpha_aff, -kappa / aff.dkappa);

    double mu_aff = (scaled_pair_trace(work.scal, aff.dxi, aff.deta, alpha_aff) +
                     (tau + alpha_aff * aff.dtau) * (kappa + alpha_aff * aff.dkappa)) /
                    (nu + 1.0);
    double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);

    // Corrector with second-order term from the predictor.
    BlockVec t_corr = corrector_target(work.scal, sigma * mu, aff);
    double r5 = sigma * mu - tau * kappa - aff.dtau * aff.dkappa;
    Direction dir = solve_direction(problem, work, c_vec, b, 1.0 - sigma, rp, rd,
                                    rg, t_corr, r5, tau, kappa);

    double alpha = std::min(cone_boundary_step(work.scal, dir.dxi),
                            cone_boundary_step(work.scal, dir.deta));
    if (dir.dtau < 0.0) alpha = std::min(alpha, -tau / dir.dtau);
    if (dir.dkappa < 0.0) alpha = std::min(alpha, -kappa / dir.dkappa);
    alpha = std::min(1.0, options.step_fraction * alpha);

    // Near convergence the normal matrix conditioning grows like 1/mu^2, so
    // once mu is near sqrt(eps) the computed direction can carry error larger
    // than the remaining residual: a step then leaves the central path and
    // wrecks an almost-converged point.  Halve the step until the trial merit
    // stays within a fixed multiple of the best merit seen (anchoring to the
    // best, not the current iterate, so the allowance cannot ratchet upward).
    // If no step length protects it the direction is pure noise and double
    // precision is exhausted for this instance: stop at the best iterate
    // instead of wandering away from it.
    if (best.valid && mu <= 1e-8 && iterate_merit <= 100.0 * options.tolerance) {
      const auto trial_merit = [&](double a) {
        BlockVec xt = x;
        xt.axpy(a, dir.dx);
        BlockVec st = s;
        st.axpy(a, dir.ds);
        const Eigen::VectorXd yt = y + a * dir.dy;
        const double taut = tau + a * dir.dtau;
        if (!(taut > 0.0)) return kInfinity;
        const Eigen::VectorXd rpt = apply_A(problem, xt) - b * taut;
        BlockVec rdt = apply_At(problem, yt);
        rdt.axpy(1.0, st);
        rdt.axpy(-taut, c_vec);
        const double prest = rpt.cwiseAbs().maxCoeff() / taut / (1.0 + bnorm);
        const double drest = rdt.inf_norm() / taut / (1.0 + cnorm);
        const double gapt = std::abs((c_vec.dot(xt) - b.dot(yt)) / taut);
        return std::max({prest, drest, gapt});
      };
      const double cap = std::max(2.0 * best.merit, 0.5 * options.tolerance);
      int halvings = 0;
      for (; halvings < 8 && trial_merit(alpha) > cap; ++halvings) {
        alpha *= 0.5;
      }
      if (halvings == 8 && trial_merit(alpha) > cap) {
        return fill_failure("search direction noise exceeds the remaining gap",
                            pres, dres, gap, mu, iter);
      }
    }
    if (alpha < 1e-13) {
      return fill_failure("step length collapsed", pres, dres, gap, mu, iter);
    }

    x.axpy(alpha, dir.dx);
    s.axpy(alpha, dir.ds);
    y += alpha * dir.dy;
    tau += alpha * dir.dtau;
    kappa += alpha * dir.dkappa;

    // Symmetrize PSD iterates to stop roundoff drift from accumulating.
    for (auto& mblk : x.psd) mblk = 0.5 * (mblk + mblk.transpose()).eval();
    for (auto& mblk : s.psd) mblk = 0.5 * (mblk + mblk.transpose()).eval();
  }

  return sol;  // unreachable; the loop always returns
}

}  // namespace arbbounds
