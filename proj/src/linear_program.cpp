#include "arbbounds/linear_program.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace arbbounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarClass { Fixed, Shifted, Flipped, Boxed, Free };

struct VarMap {
  VarClass cls = VarClass::Free;
  int primary = -1;    // standard-form column of the main part
  int negative = -1;   // second column of a split free variable
  int box_slack = -1;  // slack column of the box row
  int box_row = -1;
  double shift = 0.0;  // x = shift + z (Shifted/Boxed/Fixed), x = shift - z (Flipped)
};

struct Transform {
  std::vector<VarMap> vars;
  std::vector<int> eq_rows;    // standard row of each kept equality, -1 if dropped
  std::vector<int> ineq_rows;  // standard row of each inequality
  int n_std = 0;
  int m_std = 0;
  double offset = 0.0;  // c_min' (constant part of x)
};

double lower_of(const LinearProgram& lp, int j) {
  return lp.lower.size() > 0 ? lp.lower[j] : -kInf;
}
double upper_of(const LinearProgram& lp, int j) {
  return lp.upper.size() > 0 ? lp.upper[j] : kInf;
}

// Aggregated x-coefficient vector of a multiplier set, excluding the bound
// multipliers. Used both for certificate verification and for patching the
// coefficients that fall on fixed variables.
Eigen::VectorXd row_combination(const LinearProgram& lp, const Eigen::VectorXd& eq,
                                const Eigen::VectorXd& ineq) {
  Eigen::VectorXd combo = Eigen::VectorXd::Zero(lp.num_vars());
  if (lp.eq_coeffs.rows() > 0) combo += lp.eq_coeffs.transpose() * eq;
  if (lp.ineq_coeffs.rows() > 0) combo += lp.ineq_coeffs.transpose() * ineq;
  return combo;
}

// Turns multipliers on fixed variables' equal bounds into the lower/upper
// split that cancels the remaining coefficient there.
void patch_fixed(const LinearProgram& lp, const std::vector<VarMap>& vars,
                 LpFarkas& cert) {
  Eigen::VectorXd combo = row_combination(lp, cert.eq, cert.ineq);
  for (int j = 0; j < lp.num_vars(); ++j) {
    if (vars[j].cls != VarClass::Fixed) continue;
    cert.lower[j] += std::max(combo[j], 0.0);
    cert.upper[j] += std::max(-combo[j], 0.0);
  }
}

}  // namespace

void LinearProgram::validate() const {
  const int n = num_vars();
  if (!objective.allFinite())
    throw std::invalid_argument("objective contains non-finite values");
  if (eq_coeffs.rows() != eq_rhs.size())
    throw std::invalid_argument("equality row count does not match its right-hand side");
  if (eq_coeffs.rows() > 0 && eq_coeffs.cols() != n)
    throw std::invalid_argument("equality columns do not match the variable count");
  if (ineq_coeffs.rows() != ineq_rhs.size())
    throw std::invalid_argument("inequality row count does not match its right-hand side");
  if (ineq_coeffs.rows() > 0 && ineq_coeffs.cols() != n)
    throw std::invalid_argument("inequality columns do not match the variable count");
  if (eq_coeffs.rows() > 0 && (!eq_coeffs.allFinite() || !eq_rhs.allFinite()))
    throw std::invalid_argument("equality rows contain non-finite values");
  if (ineq_coeffs.rows() > 0 && (!ineq_coeffs.allFinite() || !ineq_rhs.allFinite()))
    throw std::invalid_argument("inequality rows contain non-finite values");
  if (lower.size() != 0 && lower.size() != n)
    throw std::invalid_argument("lower bound length does not match the variable count");
  if (upper.size() != 0 && upper.size() != n)
    throw std::invalid_argument("upper bound length does not match the variable count");
  for (int j = 0; j < n; ++j) {
    double l = lower.size() > 0 ? lower[j] : -kInf;
    double u = upper.size() > 0 ? upper[j] : kInf;
    if (std::isnan(l) || std::isnan(u) || l == kInf || u == -kInf)
      throw std::invalid_argument("variable bounds must be finite or open");
  }
}

std::pair<double, double> lp_farkas_residual(const LinearProgram& lp,
                                             const LpFarkas& cert) {
  Eigen::VectorXd combo = row_combination(lp, cert.eq, cert.ineq);
  double rhs = 0.0;
  if (cert.eq.size() > 0) rhs += cert.eq.dot(lp.eq_rhs);
  if (cert.ineq.size() > 0) rhs += cert.ineq.dot(lp.ineq_rhs);
  for (int j = 0; j < lp.num_vars(); ++j) {
    double l = lower_of(lp, j), u = upper_of(lp, j);
    double ml = cert.lower.size() > 0 ? cert.lower[j] : 0.0;
    double mu = cert.upper.size() > 0 ? cert.upper[j] : 0.0;
    if (ml != 0.0) {
      if (std::isinf(l)) return {kInf, kInf};
      combo[j] -= ml;
      rhs -= ml * l;
    }
    if (mu != 0.0) {
      if (std::isinf(u)) return {kInf, kInf};
      combo[j] += mu;
      rhs += mu * u;
    }
  }
  return {combo.cwiseAbs().maxCoeff(), rhs};
}

LpSolution solve_lp(const LinearProgram& lp, const SolverOptions& options) {
  lp.validate();
  const int n = lp.num_vars();
  const int m_eq = static_cast<int>(lp.eq_coeffs.rows());
  const int m_in = static_cast<int>(lp.ineq_coeffs.rows());
  const Eigen::VectorXd c_min =
      lp.sense == Sense::Maximize ? Eigen::VectorXd(-lp.objective) : lp.objective;
  const double sense_sign = lp.sense == Sense::Maximize ? -1.0 : 1.0;

  LpSolution out;
  out.farkas.eq = Eigen::VectorXd::Zero(m_eq);
  out.farkas.ineq = Eigen::VectorXd::Zero(m_in);
  out.farkas.lower = Eigen::VectorXd::Zero(n);
  out.farkas.upper = Eigen::VectorXd::Zero(n);

  // Crossed bounds certify infeasibility directly: x_j >= l and x_j <= u
  // with u < l aggregate to 0 <= u - l < 0.
  for (int j = 0; j < n; ++j) {
    if (lower_of(lp, j) > upper_of(lp, j)) {
      out.status = SolveStatus::Infeasible;
      out.farkas.lower[j] = 1.0;
      out.farkas.upper[j] = 1.0;
      out.farkas.violation = lower_of(lp, j) - upper_of(lp, j);
      out.message = "bounds cross on a variable";
      return out;
    }
  }

  // Variable classification and standard-form column layout.
  Transform tr;
  tr.vars.resize(n);
  for (int j = 0; j < n; ++j) {
    double l = lower_of(lp, j), u = upper_of(lp, j);
    VarMap& v = tr.vars[j];
    if (l == u) {
      v.cls = VarClass::Fixed;
      v.shift = l;
    } else if (std::isfinite(l) && std::isfinite(u)) {
      v.cls = VarClass::Boxed;
      v.shift = l;
      v.primary = tr.n_std++;
    } else if (std::isfinite(l)) {
      v.cls = VarClass::Shifted;
      v.shift = l;
      v.primary = tr.n_std++;
    } else if (std::isfinite(u)) {
      v.cls = VarClass::Flipped;
      v.shift = u;
      v.primary = tr.n_std++;
    } else {
      v.cls = VarClass::Free;
      v.primary = tr.n_std++;
    }
  }
  for (int j = 0; j < n; ++j)
    if (tr.vars[j].cls == VarClass::Free) tr.vars[j].negative = tr.n_std++;
  const int first_ineq_slack = tr.n_std;
  tr.n_std += m_in;
  for (int j = 0; j < n; ++j)
    if (tr.vars[j].cls == VarClass::Boxed) tr.vars[j].box_slack = tr.n_std++;

  for (int j = 0; j < n; ++j) {
    const VarMap& v = tr.vars[j];
    double base = v.cls == VarClass::Boxed || v.cls == VarClass::Shifted ||
                          v.cls == VarClass::Fixed
                      ? v.shift
                      : (v.cls == VarClass::Flipped ? v.shift : 0.0);
    tr.offset += c_min[j] * base;
  }

  // Rows: equalities (exactly-zero rows dropped or certified), then
  // inequalities with slacks, then box rows.
  ConicProblem cp;
  cp.cone.nonneg = tr.n_std;
  tr.eq_rows.assign(m_eq, -1);
  tr.ineq_rows.assign(m_in, -1);
  std::vector<ConstraintCoeffs> rows;
  std::vector<double> rhs;

  auto transformed_rhs = [&](const Eigen::VectorXd& coeffs, double b) {
    double bp = b;
    for (int j = 0; j < n; ++j) {
      const VarMap& v = tr.vars[j];
      if (v.cls == VarClass::Fixed || v.cls == VarClass::Shifted ||
          v.cls == VarClass::Boxed)
        bp -= coeffs[j] * v.shift;
      else if (v.cls == VarClass::Flipped)
        bp -= coeffs[j] * v.shift;
    }
    return bp;
  };

  auto append_row_coeffs = [&](ConstraintCoeffs& row, const Eigen::VectorXd& coeffs) {
    for (int j = 0; j < n; ++j) {
      double a = coeffs[j];
      if (a == 0.0) continue;
      const VarMap& v = tr.vars[j];
      switch (v.cls) {
        case VarClass::Fixed:
          break;
        case VarClass::Shifted:
        case VarClass::Boxed:
          row.orth.push_back({v.primary, a});
          break;
        case VarClass::Flipped:
          row.orth.push_back({v.primary, -a});
          break;
        case VarClass::Free:
          row.orth.push_back({v.primary, a});
          row.orth.push_back({v.negative, -a});
          break;
      }
    }
  };

  for (int r = 0; r < m_eq; ++r) {
    ConstraintCoeffs row;
    append_row_coeffs(row, lp.eq_coeffs.row(r));
    double bp = transformed_rhs(lp.eq_coeffs.row(r), lp.eq_rhs[r]);
    if (row.orth.empty()) {
      if (std::abs(bp) > options.tolerance * (1.0 + std::abs(lp.eq_rhs[r]))) {
        out.status = SolveStatus::Infeasible;
        out.farkas.eq[r] = bp > 0.0 ? -1.0 : 1.0;
        patch_fixed(lp, tr.vars, out.farkas);
        out.farkas.violation = std::abs(bp);
        out.message = "equality row reduces to 0 = nonzero after fixing variables";
        return out;
      }
      continue;  // redundant row
    }
    tr.eq_rows[r] = static_cast<int>(rows.size());
    rows.push_back(std::move(row));
    rhs.push_back(bp);
  }
  for (int r = 0; r < m_in; ++r) {
    ConstraintCoeffs row;
    append_row_coeffs(row, lp.ineq_coeffs.row(r));
    row.orth.push_back({first_ineq_slack + r, 1.0});
    tr.ineq_rows[r] = static_cast<int>(rows.size());
    rows.push_back(std::move(row));
    rhs.push_back(transformed_rhs(lp.ineq_coeffs.row(r), lp.ineq_rhs[r]));
  }
  for (int j = 0; j < n; ++j) {
    const VarMap& v = tr.vars[j];
    if (v.cls != VarClass::Boxed) continue;
    tr.vars[j].box_row = static_cast<int>(rows.size());
    ConstraintCoeffs row;
    row.orth.push_back({v.primary, 1.0});
    row.orth.push_back({v.box_slack, 1.0});
    rows.push_back(std::move(row));
    rhs.push_back(upper_of(lp, j) - v.shift);
  }

  tr.m_std = static_cast<int>(rows.size());
  cp.rows = std::move(rows);
  cp.rhs = Eigen::Map<const Eigen::VectorXd>(rhs.data(), rhs.size());
  for (int j = 0; j < n; ++j) {
    const VarMap& v = tr.vars[j];
    double cj = c_min[j];
    if (cj == 0.0) continue;
    switch (v.cls) {
      case VarClass::Fixed:
        break;
      case VarClass::Shifted:
      case VarClass::Boxed:
        cp.objective.orth.push_back({v.primary, cj});
        break;
      case VarClass::Flipped:
        cp.objective.orth.push_back({v.primary, -cj});
        break;
      case VarClass::Free:
        cp.objective.orth.push_back({v.primary, cj});
        cp.objective.orth.push_back({v.negative, -cj});
        break;
    }
  }

  ConicSolution cs = solve_conic(cp, options);
  out.status = cs.status;
  out.duality_gap = cs.duality_gap;
  out.primal_residual = cs.primal_residual;
  out.dual_residual = cs.dual_residual;
  out.iterations = cs.iterations;
  out.message = cs.message;

  auto rebuild_x = [&](const BlockVec& z, bool with_shift) {
    Eigen::VectorXd xv = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < n; ++j) {
      const VarMap& v = tr.vars[j];
      switch (v.cls) {
        case VarClass::Fixed:
          xv[j] = with_shift ? v.shift : 0.0;
          break;
        case VarClass::Shifted:
        case VarClass::Boxed:
          xv[j] = (with_shift ? v.shift : 0.0) + z.orth[v.primary];
          break;
        case VarClass::Flipped:
          xv[j] = (with_shift ? v.shift : 0.0) - z.orth[v.primary];
          break;
        case VarClass::Free:
          xv[j] = z.orth[v.primary] - z.orth[v.negative];
          break;
      }
    }
    return xv;
  };

  switch (cs.status) {
    case SolveStatus::Optimal: {
      out.x = rebuild_x(cs.x, true);
      out.objective = sense_sign * (cs.primal_objective + tr.offset);
      out.eq_duals = Eigen::VectorXd::Zero(m_eq);
      for (int r = 0; r < m_eq; ++r)
        if (tr.eq_rows[r] >= 0) out.eq_duals[r] = cs.y[tr.eq_rows[r]];
      out.ineq_duals = Eigen::VectorXd::Zero(m_in);
      for (int r = 0; r < m_in; ++r) out.ineq_duals[r] = -cs.y[tr.ineq_rows[r]];
      out.lower_duals = Eigen::VectorXd::Zero(n);
      out.upper_duals = Eigen::VectorXd::Zero(n);
      for (int j = 0; j < n; ++j) {
        const VarMap& v = tr.vars[j];
        switch (v.cls) {
          case VarClass::Shifted:
            out.lower_duals[j] = cs.s.orth[v.primary];
            break;
          case VarClass::Boxed:
            out.lower_duals[j] = cs.s.orth[v.primary];
            out.upper_duals[j] = cs.s.orth[v.box_slack];
            break;
          case VarClass::Flipped:
            out.upper_duals[j] = cs.s.orth[v.primary];
            break;
          default:
            break;
        }
      }
      // Fixed variables absorb whatever stationarity residual remains.
      for (int j = 0; j < n; ++j) {
        if (tr.vars[j].cls != VarClass::Fixed) continue;
        double r = c_min[j];
        if (m_eq > 0) r -= lp.eq_coeffs.col(j).dot(out.eq_duals);
        if (m_in > 0) r += lp.ineq_coeffs.col(j).dot(out.ineq_duals);
        out.lower_duals[j] = std::max(r, 0.0);
        out.upper_duals[j] = std::max(-r, 0.0);
      }
      break;
    }
    case SolveStatus::Infeasible: {
      for (int r = 0; r < m_eq; ++r)
        if (tr.eq_rows[r] >= 0) out.farkas.eq[r] = -cs.y[tr.eq_rows[r]];
      for (int r = 0; r < m_in; ++r)
        out.farkas.ineq[r] = std::max(-cs.y[tr.ineq_rows[r]], 0.0);
      for (int j = 0; j < n; ++j) {
        const VarMap& v = tr.vars[j];
        switch (v.cls) {
          case VarClass::Shifted:
            out.farkas.lower[j] = std::max(cs.s.orth[v.primary], 0.0);
            break;
          case VarClass::Boxed:
            out.farkas.lower[j] = std::max(cs.s.orth[v.primary], 0.0);
            out.farkas.upper[j] = std::max(cs.s.orth[v.box_slack], 0.0);
            break;
          case VarClass::Flipped:
            out.farkas.upper[j] = std::max(cs.s.orth[v.primary], 0.0);
            break;
          default:
            break;
        }
      }
      patch_fixed(lp, tr.vars, out.farkas);
      out.farkas.violation = -lp_farkas_residual(lp, out.farkas).second;
      break;
    }
    case SolveStatus::Unbounded: {
      out.ray = rebuild_x(cs.x, false);
      break;
    }
    case SolveStatus::NumericalFailure:
      out.x = rebuild_x(cs.x, true);
      out.objective = sense_sign * (cs.primal_objective + tr.offset);
      break;
  }
  return out;
}

}  // namespace arbbounds
