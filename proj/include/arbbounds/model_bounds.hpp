// Dynamic price bounds: extremize the target basket's variance over positive
// semidefinite covariance matrices that reproduce every quoted implied
// variance, then map the variance interval back to prices.
#pragma once

#include "arbbounds/conic_solver.hpp"
#include "arbbounds/market_model.hpp"
#include "arbbounds/pricing.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace arbbounds {

// One calibrated quote: the rate covariance X must satisfy
// Tr(loading * X) * T = total_variance.
struct VarianceConstraint {
    Eigen::MatrixXd loading;       // rank-one PSD, what_i * what_i'
    double total_variance = 0.0;   // implied sigma^2 T of the quote
    int source_index = -1;         // position in MarketData::instruments
};

// Variance and price intervals for the target basket.  Variances are total
// (sigma^2 T); witnesses are rate covariances.  When a bound is not Optimal
// its variance and price are NaN, except the Unbounded upper bound which
// maps to variance +inf and price w'F.
struct ModelBoundsResult {
    double variance_lower = 0.0;
    double variance_upper = 0.0;
    double price_lower = 0.0;
    double price_upper = 0.0;
    Eigen::MatrixXd covariance_lower;  // witness for the lower bound
    Eigen::MatrixXd covariance_upper;  // witness for the upper bound
    SolveStatus lower_status = SolveStatus::NumericalFailure;
    SolveStatus upper_status = SolveStatus::NumericalFailure;
    // Dual certificate when the quotes admit no consistent covariance; the
    // components follow the constraint order from build_variance_constraints.
    Eigen::VectorXd farkas;
    std::string message;
};

// Converts every quoted call (and parity-converted straddle) into a variance
// constraint.  Forward instruments contribute nothing.  Throws
// PriceOutOfRange naming the instrument when a quote sits outside the open
// static interval, and std::invalid_argument for quotes with negative
// weights or a nonpositive strike (outside the lognormal domain).
std::vector<VarianceConstraint> build_variance_constraints(
    const MarketData& data);

// Two semidefinite solves (min and max of Tr(loading_target * X) subject to
// the quote constraints and X PSD).  Infeasible means no PSD covariance
// reproduces the quotes: a dynamic arbitrage diagnostic, with certificate.
ModelBoundsResult model_price_bounds(const MarketData& data,
                                     const Basket& target,
                                     const SolverOptions& options = {});

}  // namespace arbbounds
