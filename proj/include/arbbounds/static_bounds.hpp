// Static arbitrage bounds: the outer LP relaxation enforcing positivity,
// monotonicity, convexity and homogeneity of the basket-call price surface
// on the quoted points, and the inner LP over grid-discretized measures.
#pragma once

#include "arbbounds/conic_solver.hpp"
#include "arbbounds/linear_program.hpp"
#include "arbbounds/market_model.hpp"
#include "arbbounds/pricing.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace arbbounds {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

// One point of the call price surface C(w, K) in the extended coordinate
// (w, K).  Forwards appear as (e_i, 0) with price S_i; straddle quotes are
// parity-converted to calls before they become price points.
struct PricePoint {
    enum class Role { Quoted, Target, Forward };
    Eigen::VectorXd weights;
    double strike = 0.0;
    double price = 0.0;
    Role role = Role::Quoted;
};

// Lattice of (bins+1)^n atoms spread uniformly over a per-asset box.
// Empty bounds mean the unit box.
struct GridSpec {
    Eigen::VectorXd box_lower;   // componentwise >= 0
    Eigen::VectorXd box_upper;
    int bins = 10;
    long atom_cap = 100000;      // guard on (bins+1)^n

    static GridSpec cube(int n, double lo, double hi, int bins);
};

// Outer bounds with the optimal subgradient field as the certificate: row i
// of the subgradient matrix is g_i in R^{n+1}, row 0 belonging to the
// target.  The rows witness a supporting price surface attaining the bound.
struct OuterBoundsResult {
    double lower = 0.0;
    double upper = 0.0;
    SolveStatus lower_status = SolveStatus::NumericalFailure;
    SolveStatus upper_status = SolveStatus::NumericalFailure;
    std::vector<PricePoint> points;  // index 0 is the target
    Eigen::MatrixXd lower_subgradients;
    Eigen::MatrixXd upper_subgradients;
    LpFarkas farkas;  // populated when the quotes admit no surface
    std::string message;
};

// Candidate buy-and-hold portfolio extracted from the Farkas certificate:
// hold positions[i] units of points[i]'s payoff plus `cash` units of cash.
// Its setup cost is negative while the aggregated payoff combination is
// nonnegative at this relaxation level.
struct ArbitrageCertificate {
    std::vector<PricePoint> points;
    Eigen::VectorXd positions;
    double cash = 0.0;
    double cost = 0.0;  // positions'prices + cash, negative
    LpFarkas farkas;    // raw LP multipliers
};

struct StaticArbitrageCheck {
    bool consistent = false;
    ArbitrageCertificate certificate;  // meaningful when !consistent
    std::string message;
};

// Inner bounds with witness measures attaining them.  Witnesses are one
// optimizer among possibly many.
struct InnerBoundsResult {
    double lower = 0.0;
    double upper = 0.0;
    SolveStatus lower_status = SolveStatus::NumericalFailure;
    SolveStatus upper_status = SolveStatus::NumericalFailure;
    DiscreteMeasure lower_witness;
    DiscreteMeasure upper_witness;
    std::string message;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Quotes and forwards as call price points (straddles parity-converted,
// forward-kind instruments folded into the forward points).  Duplicate
// coordinates with conflicting prices throw std::invalid_argument; exact
// duplicates are merged.
std::vector<PricePoint> build_price_points(const MarketData& data);

// Two LP solves of the subgradient relaxation.  The target participates in
// the cross-constraint set as index 0 with its price as a variable.
// Infeasible means no consistent price surface exists: static arbitrage
// among the quotes.
OuterBoundsResult outer_bounds(const MarketData& data, const Basket& target,
                               const SolverOptions& options = {});

// Feasibility of the subgradient system without a target.  Consistent means
// no arbitrage is detectable at this relaxation level (the conditions are
// necessary, and sufficient only in dimension one).
StaticArbitrageCheck check_static_arbitrage(const MarketData& data,
                                            const SolverOptions& options = {});

// LP over probability measures on the grid atoms matching all forwards and
// quotes exactly.  Infeasible means no grid measure reproduces the quotes
// (grid too coarse or quotes off-grid).
InnerBoundsResult inner_bounds(const MarketData& data, const Basket& target,
                               const GridSpec& grid,
                               const SolverOptions& options = {});

}  // namespace arbbounds
