#include "arbbounds/pricing.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace arbbounds {

namespace {

constexpr double kPsdSlack = 1e-12;       // eigenvalue tolerance in validate()
constexpr double kInversionTol = 1e-10;   // price residual after inversion

}  // namespace

// ---------------------------------------------------------------------------
// Model validation
// ---------------------------------------------------------------------------

void CovarianceModel::validate() const {
    const auto n = forwards.size();
    if (n == 0) {
        throw std::invalid_argument("covariance model has no assets");
    }
    if (covariance.rows() != n || covariance.cols() != n) {
        throw std::invalid_argument(
            "covariance dimensions do not match the forward vector");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(forwards[i] > 0.0) || !std::isfinite(forwards[i])) {
            throw std::invalid_argument("forwards must be positive and finite");
        }
    }
    if (!covariance.allFinite()) {
        throw std::invalid_argument("covariance has nonfinite entries");
    }
    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() >
        kPsdSlack * scale) {
        throw std::invalid_argument("covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance,
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPsdSlack * scale) {
        throw std::invalid_argument(
            "covariance is not positive semidefinite");
    }
}

// ---------------------------------------------------------------------------
// Scalar pricing
// ---------------------------------------------------------------------------

double normal_cdf(double x) {
    // erfc keeps full relative accuracy in the left tail where
    // 1 - erf would cancel.
    return 0.5 * std::erfc(-x * (1.0 / std::sqrt(2.0)));
}

double bs_call(double forward, double strike, double total_variance) {
    if (!(forward > 0.0) || !std::isfinite(forward)) {
        throw std::invalid_argument("bs_call requires a positive forward");
    }
    if (total_variance < 0.0 || !std::isfinite(total_variance)) {
        throw std::invalid_argument("bs_call requires total variance >= 0");
    }
    if (strike <= 0.0) {
        // The payoff is linear once the strike is at or below zero.
        return forward - strike;
    }
    if (total_variance == 0.0) {
        return std::max(forward - strike, 0.0);
    }
    const double vol = std::sqrt(total_variance);
    const double h = std::log(forward / strike) / vol + 0.5 * vol;
    return forward * normal_cdf(h) - strike * normal_cdf(h - vol);
}

// ---------------------------------------------------------------------------
// Basket moment matching
// ---------------------------------------------------------------------------

EffectiveWeights effective_weights(const Eigen::VectorXd& weights,
                                   const Eigen::VectorXd& forwards) {
    if (weights.size() != forwards.size()) {
        throw std::invalid_argument(
            "weights and forwards have different dimensions");
    }
    const double basket_forward = weights.dot(forwards);
    if (basket_forward == 0.0 || !std::isfinite(basket_forward)) {
        throw std::invalid_argument(
            "basket forward w'F must be nonzero and finite");
    }
    EffectiveWeights out;
    out.weights = weights.cwiseProduct(forwards) / basket_forward;
    out.outer = out.weights * out.weights.transpose();
    return out;
}

double basket_variance(const Basket& basket, const CovarianceModel& model) {
    if (basket.weights.size() != model.forwards.size()) {
        throw std::invalid_argument(
            "basket weights do not match the model dimension");
    }
    if ((basket.weights.array() < 0.0).any()) {
        throw std::invalid_argument(
            "basket pricing requires nonnegative weights");
    }
    if (basket.maturity <= 0.0) {
        throw std::invalid_argument("maturity must be positive");
    }
    const EffectiveWeights ew =
        effective_weights(basket.weights, model.forwards);
    const double variance_rate = ew.weights.dot(model.covariance * ew.weights);
    // Clamp tiny negative values produced by an indefinite-within-tolerance X.
    return std::max(variance_rate, 0.0) * basket.maturity;
}

double basket_call_price(const Basket& basket, const CovarianceModel& model) {
    const double total_variance = basket_variance(basket, model);
    const double basket_forward = basket.weights.dot(model.forwards);
    return bs_call(basket_forward, basket.strike, total_variance);
}

// ---------------------------------------------------------------------------
// Implied variance
// ---------------------------------------------------------------------------

double implied_variance(double price, double forward, double strike) {
    if (!(forward > 0.0) || !(strike > 0.0)) {
        throw std::invalid_argument(
            "implied variance requires positive forward and strike");
    }
    const double intrinsic = std::max(forward - strike, 0.0);
    if (!(price > intrinsic) || !(price < forward)) {
        throw PriceOutOfRange(
            "price is outside the open interval ((F-K)+, F)");
    }

    // Bracket the root: bs_call is strictly increasing in V with range
    // (intrinsic, F), so doubling the upper endpoint always succeeds for an
    // in-range price.
    double lo = 0.0;
    double hi = 1.0;
    int doublings = 0;
    while (bs_call(forward, strike, hi) < price) {
        hi *= 2.0;
        if (++doublings > 64) {
            throw PriceOutOfRange("price could not be bracketed");
        }
    }

    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;  // interval collapsed to adjacent doubles
        }
        const double value = bs_call(forward, strike, mid);
        if (value < price) {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    double v = 0.5 * (lo + hi);

    // One or two Newton polish steps using the variance vega
    // dC/dV = F phi(h) / (2 sqrt(V)); bisection already has ~15 digits so
    // this mostly tightens the residual check below.
    for (int iter = 0; iter < 2; ++iter) {
        const double vol = std::sqrt(v);
        if (vol == 0.0) {
            break;
        }
        const double h = std::log(forward / strike) / vol + 0.5 * vol;
        const double phi =
            std::exp(-0.5 * h * h) / std::sqrt(2.0 * M_PI);
        const double vega = forward * phi / (2.0 * vol);
        if (vega <= 0.0 || !std::isfinite(vega)) {
            break;
        }
        const double residual = bs_call(forward, strike, v) - price;
        const double next = v - residual / vega;
        if (next > 0.0 && std::isfinite(next)) {
            v = next;
        }
    }

    if (std::abs(bs_call(forward, strike, v) - price) > kInversionTol) {
        throw PriceOutOfRange(
            "implied variance inversion failed the residual check");
    }
    return v;
}

double straddle_price_from_call(double call_price, double basket_forward,
                                double strike) {
    return 2.0 * call_price - (basket_forward - strike);
}

double call_price_from_straddle(double straddle_price, double basket_forward,
                                double strike) {
    return 0.5 * (straddle_price + basket_forward - strike);
}

}  // namespace arbbounds
