// Black-Scholes basket pricing: moment matching, implied variance, parity.
#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace arbbounds {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

// Basket call contract: payoff (w'x - K)+ at time T.
struct Basket {
    Eigen::VectorXd weights;
    double strike = 0.0;
    double maturity = 1.0;
};

// Joint lognormal model: forward vector F (all entries positive) and the
// covariance matrix X of log returns per unit time.  X must be symmetric
// positive semidefinite.
struct CovarianceModel {
    Eigen::VectorXd forwards;
    Eigen::MatrixXd covariance;

    // Throws std::invalid_argument on dimension mismatch, nonpositive
    // forwards, asymmetry, or an eigenvalue below -1e-12.
    void validate() const;
};

// Forward-weighted basket coefficients: what_i = w_i F_i / (w'F), together
// with the rank-one loading matrix what * what'.  The basket log variance per
// unit time is trace(outer * X).
struct EffectiveWeights {
    Eigen::VectorXd weights;
    Eigen::MatrixXd outer;
};

// Thrown when a quoted price is outside the open no-arbitrage interval
// ((F-K)+, F) and therefore has no implied variance.
struct PriceOutOfRange : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Standard normal CDF, accurate to ~1e-15 absolute error.
double normal_cdf(double x);

// Undiscounted Black-Scholes call on forward F with strike K and total
// variance V = sigma^2 T.  Limits: K <= 0 gives F - K, V = 0 gives (F-K)+.
// Requires F > 0 and V >= 0.
double bs_call(double forward, double strike, double total_variance);

// Forward-weighted coefficients for basket w under forwards F.
// Requires matching dimensions and w'F != 0.
EffectiveWeights effective_weights(const Eigen::VectorXd& weights,
                                   const Eigen::VectorXd& forwards);

// Lognormal-approximation total variance of the basket: trace(outer X) * T.
// Requires nonnegative weights with w'F > 0.
double basket_variance(const Basket& basket, const CovarianceModel& model);

// Basket call price under the moment-matched lognormal approximation:
// bs_call(w'F, K, basket_variance).
double basket_call_price(const Basket& basket, const CovarianceModel& model);

// Inverts bs_call in V for a quoted call price.  Throws PriceOutOfRange
// unless (F-K)+ < price < F.  The result V satisfies
// |bs_call(F, K, V) - price| <= 1e-10.
double implied_variance(double price, double forward, double strike);

// Straddle price implied by call-put parity: |w'x - K| = 2(w'x - K)+ - (w'x - K),
// so straddle = 2 * call - (F_basket - K).
double straddle_price_from_call(double call_price, double basket_forward,
                                double strike);

// Inverse of the above: call = (straddle + F_basket - K) / 2.
double call_price_from_straddle(double straddle_price, double basket_forward,
                                double strike);

}  // namespace arbbounds
