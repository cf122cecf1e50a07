// Moment relaxations of the static arbitrage problem: monomial bases over
// the payoff semigroup, moment and localizing matrices, and the order-N
// semidefinite relaxation bounding a target straddle price over all measures
// on a support box that reproduce the pinned forward and straddle prices.
#pragma once

#include "arbbounds/conic_solver.hpp"
#include "arbbounds/market_model.hpp"
#include "arbbounds/pricing.hpp"

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace arbbounds {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

// Payoff generator list: symbol 0 is the target straddle |w0'x - K0|,
// symbols 1..n are the asset coordinates x_i, and symbols n+1..n+m are the
// quoted straddles |w_j'x - K_j|.  The ordering is fixed; monomial
// exponents, moment vectors and price pins all refer to it.
struct PayoffGenerators {
    int assets = 0;                  // n
    Eigen::VectorXd target_weights;  // w0, size n
    double target_strike = 0.0;      // K0
    Eigen::MatrixXd quote_weights;   // m x n, row j the j-th quoted straddle
    Eigen::VectorXd quote_strikes;   // size m

    int count() const;  // n + m + 1 symbols
    double evaluate(int symbol, const Eigen::VectorXd& x) const;
    double evaluate_monomial(const Eigen::VectorXi& exponent,
                             const Eigen::VectorXd& x) const;
};

// Market restated for the moment relaxation: the generator list plus the
// degree-one price pins.  pinned_prices(k) is the quoted expectation of
// symbol k+1 (asset forwards first, then straddle prices, with call quotes
// parity-converted).  target_price is set when the target coincides with a
// quoted payoff, which pins the objective coordinate itself.
struct StraddleMarket {
    PayoffGenerators generators;
    Eigen::VectorXd pinned_prices;  // size n + m
    std::optional<double> target_price;
};

// Monomial basis of the payoff semigroup up to the given degree, in graded
// lexicographic order: degree blocks ascending, symbol 0 most significant
// within a block.  exponents[0] is the constant monomial.
struct MomentBasis {
    int generator_count = 0;
    int degree = 0;
    std::vector<Eigen::VectorXi> exponents;

    int size() const { return static_cast<int>(exponents.size()); }

    // Position of an exponent in the basis.  Throws std::out_of_range when
    // the total degree exceeds the basis degree.
    int index_of(const Eigen::VectorXi& exponent) const;
};

// Moments of every basis monomial under one measure; values(0) = 1 for a
// probability measure.
struct MomentVector {
    MomentBasis basis;
    Eigen::VectorXd values;
};

// One term of a polynomial in the generators.
struct MonomialTerm {
    Eigen::VectorXi exponent;  // size = generator count
    double coefficient = 0.0;
};

struct MomentOptions {
    int order = 1;              // relaxation order N; moments go up to 2N+1
    Eigen::VectorXd box_lower;  // support box, empty: zeros
    Eigen::VectorXd box_upper;  // empty: componentwise 10
    double beta = 0.0;          // <= 0: sum of the generator sups over the box

    // PSD localizers for every generator.  false restricts them to the
    // asset coordinates, which leaves even the sign of the target moment
    // unconstrained.
    bool localize_all_generators = true;

    // Identify each squared straddle with its quadratic expansion in the
    // coordinates, eliminating the reducible moment entries.  Off by
    // default: the plain relaxation treats the generators as free symbols.
    bool straddle_square_identities = false;

    // Relaxation optima sit on degenerate faces of the moment cone where the
    // interior-point method loses strict complementarity; residuals plateau
    // near 5e-8 at order 1 and 1.5e-7 at order 2, so 2e-7 is the reliable
    // double-precision floor for these instances.
    SolverOptions solver{.tolerance = 2e-7};
};

// Statuses speak about the relaxation itself: Infeasible means no moment
// vector of this order reproduces the pins (arbitrage among the quotes),
// Unbounded means the pins and support box fail to bound the target moment.
// NumericalFailure keeps the last iterate's objective as a diagnostic value
// with the solver residuals quoted in the message.
struct MomentBoundsResult {
    double lower = 0.0;
    double upper = 0.0;
    SolveStatus lower_status = SolveStatus::NumericalFailure;
    SolveStatus upper_status = SolveStatus::NumericalFailure;
    MomentVector lower_moments;  // filled when the matching solve is Optimal
    MomentVector upper_moments;
    double beta = 0.0;           // the support bound actually imposed
    std::string message;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

MomentBasis enumerate_monomials(int generator_count, int degree);

// Exact expectations of every basis monomial under the measure.
MomentVector moments_of(const DiscreteMeasure& measure,
                        const PayoffGenerators& generators, int degree);

// M_N(y): entry (i, j) is the moment of the product of basis monomials i
// and j.  Requires basis degree >= 2 * order.
Eigen::MatrixXd moment_matrix(const MomentVector& y, int order);

// M_N(g y): the moment matrix reweighted by the polynomial g.  Requires
// basis degree >= 2 * order + deg(g); for g = 1 this is moment_matrix.
Eigen::MatrixXd localizing_matrix(const MomentVector& y,
                                  const std::vector<MonomialTerm>& weight,
                                  int order);

// Upper bound on the summed generator payoffs over the box, each generator
// maximized separately.  Every payoff is convex, so its sup over the box
// sits at a corner and is found componentwise.
double beta_bound(const PayoffGenerators& generators,
                  const Eigen::VectorXd& box_lower,
                  const Eigen::VectorXd& box_upper);

// beta - sum of the generators: the polynomial whose localizing matrix
// encodes the support box inside the relaxation.
std::vector<MonomialTerm> beta_polynomial(int generator_count, double beta);

// Quotes restated as straddle generators with pinned prices.  Call quotes
// are parity-converted, forward-kind instruments are consistency-checked
// against the forward vector and dropped, duplicate payoffs merge, and one
// payoff quoted at conflicting prices throws std::invalid_argument.
StraddleMarket build_straddle_market(const MarketData& data,
                                     const Basket& target);

// Two SDP solves, minimizing and maximizing the target moment over moment
// vectors that make the order-N moment matrix, the localizing matrices and
// the support-box matrix PSD while matching the price pins.  Generators are
// rescaled internally to unit sup over the box; reported bounds and moment
// vectors are in original units.
MomentBoundsResult moment_bound(const MarketData& data, const Basket& target,
                                const MomentOptions& options = {});

}  // namespace arbbounds
