#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "arbbounds/pricing.hpp"

#include <cmath>

using namespace arbbounds;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> vals) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v[i++] = x;
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Normal CDF
// ---------------------------------------------------------------------------

TEST_CASE("normal_cdf matches high precision reference values") {
    // Reference values computed with 40-digit arithmetic.
    CHECK(std::abs(normal_cdf(0.0) - 0.5) <= 1e-16);
    CHECK(std::abs(normal_cdf(1.0) - 0.8413447460685429485852325456) <= 1e-14);
    CHECK(std::abs(normal_cdf(0.1) - 0.5398278372770289836689339077) <= 1e-14);
    CHECK(std::abs(normal_cdf(-2.5) - 0.0062096653257761351669781046) <= 1e-14);
    CHECK(std::abs(normal_cdf(3.0) - 0.9986501019683699054733481852) <= 1e-14);
}

TEST_CASE("normal_cdf symmetry and monotonicity") {
    for (double x = -6.0; x <= 6.0; x += 0.37) {
        CHECK(std::abs(normal_cdf(x) + normal_cdf(-x) - 1.0) <= 1e-15);
    }
    double prev = normal_cdf(-8.0);
    for (double x = -7.5; x <= 8.0; x += 0.5) {
        const double cur = normal_cdf(x);
        CHECK(cur > prev);
        prev = cur;
    }
}

// ---------------------------------------------------------------------------
// Black-Scholes call
// ---------------------------------------------------------------------------

TEST_CASE("bs_call matches high precision reference values") {
    CHECK(std::abs(bs_call(1.0, 1.0, 0.04) - 0.0796556745540579629308092365) <=
          1e-14);
    CHECK(std::abs(bs_call(1.2, 1.0, 0.09) - 0.2544056346781430639025986712) <=
          1e-14);
    CHECK(std::abs(bs_call(1.0, 1.0, 4.0) - 0.6826894921370858971704650913) <=
          1e-14);
    // At the money the price reduces to F * (2 N(sqrt(V)/2) - 1).
    const double v = 0.25;
    CHECK(bs_call(2.0, 2.0, v) ==
          doctest::Approx(2.0 * (2.0 * normal_cdf(std::sqrt(v) / 2.0) - 1.0))
              .epsilon(1e-14));
}

TEST_CASE("bs_call limiting cases") {
    CHECK(bs_call(1.5, 0.0, 0.3) == doctest::Approx(1.5));
    CHECK(bs_call(1.5, -2.0, 0.3) == doctest::Approx(3.5));
    CHECK(bs_call(1.5, 1.0, 0.0) == doctest::Approx(0.5));
    CHECK(bs_call(1.0, 1.5, 0.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(bs_call(-1.0, 1.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(bs_call(1.0, 1.0, -0.1), std::invalid_argument);
}

TEST_CASE("bs_call respects arbitrage envelope and convexity in strike") {
    const double forward = 1.3;
    const double variance = 0.2;
    const double dk = 0.05;
    for (double strike = 0.2; strike <= 2.6; strike += dk) {
        const double price = bs_call(forward, strike, variance);
        CHECK(price > std::max(forward - strike, 0.0));
        CHECK(price < forward);
        const double left = bs_call(forward, strike - dk, variance);
        const double right = bs_call(forward, strike + dk, variance);
        CHECK(left + right - 2.0 * price >= -1e-12);  // convex in strike
        CHECK(left >= price);                          // decreasing in strike
    }
    // Strictly increasing in total variance.
    double prev = bs_call(forward, 1.0, 1e-8);
    for (double v = 0.01; v <= 2.0; v += 0.05) {
        const double cur = bs_call(forward, 1.0, v);
        CHECK(cur > prev);
        prev = cur;
    }
}

// ---------------------------------------------------------------------------
// Effective weights and basket variance
// ---------------------------------------------------------------------------

TEST_CASE("effective weights of an equally weighted five asset basket") {
    const auto weights = vec({0.2, 0.2, 0.2, 0.2, 0.2});
    const auto forwards = vec({0.03, 0.03, 0.05, 0.07, 0.07});
    const EffectiveWeights ew = effective_weights(weights, forwards);
    const auto expect = vec({0.12, 0.12, 0.20, 0.28, 0.28});
    CHECK((ew.weights - expect).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(std::abs(ew.weights.sum() - 1.0) <= 1e-15);
    CHECK((ew.outer - expect * expect.transpose()).cwiseAbs().maxCoeff() <=
          1e-15);
}

TEST_CASE("effective weights rejects degenerate baskets") {
    CHECK_THROWS_AS(effective_weights(vec({1.0, -1.0}), vec({1.0, 1.0})),
                    std::invalid_argument);
    CHECK_THROWS_AS(effective_weights(vec({1.0}), vec({1.0, 2.0})),
                    std::invalid_argument);
}

TEST_CASE("basket variance equals the quadratic form in effective weights") {
    CovarianceModel model;
    model.forwards = vec({1.0, 2.0, 0.5});
    Eigen::MatrixXd x(3, 3);
    x << 0.09, 0.02, 0.01,
         0.02, 0.16, 0.03,
         0.01, 0.03, 0.04;
    model.covariance = x;
    model.validate();

    Basket basket;
    basket.weights = vec({0.5, 0.25, 0.25});
    basket.strike = 1.0;
    basket.maturity = 2.0;

    const EffectiveWeights ew =
        effective_weights(basket.weights, model.forwards);
    const double direct = ew.weights.dot(x * ew.weights) * basket.maturity;
    CHECK(basket_variance(basket, model) == doctest::Approx(direct).epsilon(1e-14));
    // trace(outer * X) is the same quadratic form.
    CHECK((ew.outer * x).trace() * basket.maturity ==
          doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("single asset basket price reduces to plain Black-Scholes") {
    CovarianceModel model;
    model.forwards = vec({1.25});
    model.covariance = Eigen::MatrixXd::Constant(1, 1, 0.09);

    Basket basket;
    basket.weights = vec({1.0});
    basket.strike = 1.1;
    basket.maturity = 0.5;

    CHECK(basket_call_price(basket, model) ==
          doctest::Approx(bs_call(1.25, 1.1, 0.09 * 0.5)).epsilon(1e-14));
}

TEST_CASE("basket pricing rejects negative weights") {
    CovarianceModel model;
    model.forwards = vec({1.0, 1.0});
    model.covariance = Eigen::MatrixXd::Identity(2, 2) * 0.04;
    Basket basket;
    basket.weights = vec({1.0, -0.5});
    basket.strike = 0.4;
    CHECK_THROWS_AS(basket_variance(basket, model), std::invalid_argument);
}

TEST_CASE("covariance model validation catches bad inputs") {
    CovarianceModel model;
    model.forwards = vec({1.0, 1.0});
    model.covariance = Eigen::MatrixXd::Identity(2, 2);
    model.validate();

    CovarianceModel negative_forward = model;
    negative_forward.forwards[0] = -1.0;
    CHECK_THROWS_AS(negative_forward.validate(), std::invalid_argument);

    CovarianceModel asym = model;
    asym.covariance(0, 1) = 0.5;  // only one side
    CHECK_THROWS_AS(asym.validate(), std::invalid_argument);

    CovarianceModel indefinite = model;
    indefinite.covariance << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(indefinite.validate(), std::invalid_argument);

    CovarianceModel mismatched = model;
    mismatched.covariance = Eigen::MatrixXd::Identity(3, 3);
    CHECK_THROWS_AS(mismatched.validate(), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Implied variance
// ---------------------------------------------------------------------------

TEST_CASE("implied variance matches a high precision reference") {
    const double v = implied_variance(0.0797, 1.0, 1.0);
    CHECK(std::abs(v - 0.0400446783314382285275911762) <= 1e-12);
}

TEST_CASE("implied variance round trips bs_call across a wide grid") {
    const double forward = 1.0;
    int round_trips = 0;
    for (double strike : {0.4, 0.7, 1.0, 1.3, 2.0}) {
        for (double v : {1e-4, 0.01, 0.04, 0.25, 1.0, 4.0, 16.0}) {
            const double price = bs_call(forward, strike, v);
            const double intrinsic = std::max(forward - strike, 0.0);
            if (!(price > intrinsic) || !(price < forward)) {
                // Far from the money the price collapses onto the envelope in
                // double precision; no variance is recoverable there and the
                // inversion must refuse.
                CHECK_THROWS_AS(implied_variance(price, forward, strike),
                                PriceOutOfRange);
                continue;
            }
            const double recovered = implied_variance(price, forward, strike);
            CHECK(std::abs(bs_call(forward, strike, recovered) - price) <=
                  1e-10);
            if (std::min(price - intrinsic, forward - price) > 1e-6) {
                CHECK(recovered == doctest::Approx(v).epsilon(1e-6));
                ++round_trips;
            }
        }
    }
    CHECK(round_trips >= 20);  // the grid must actually exercise the solver
}

TEST_CASE("implied variance rejects prices outside the open interval") {
    CHECK_THROWS_AS(implied_variance(0.0, 1.0, 1.0), PriceOutOfRange);
    CHECK_THROWS_AS(implied_variance(1.0, 1.0, 1.0), PriceOutOfRange);
    CHECK_THROWS_AS(implied_variance(1.5, 1.0, 1.0), PriceOutOfRange);
    CHECK_THROWS_AS(implied_variance(0.2, 1.5, 1.2), PriceOutOfRange);
    CHECK_THROWS_AS(implied_variance(-0.1, 1.0, 1.0), PriceOutOfRange);
    // Exactly intrinsic is out of range for an in the money strike.
    CHECK_THROWS_AS(implied_variance(0.3, 1.5, 1.2), PriceOutOfRange);
    // Just above intrinsic is fine.
    CHECK(implied_variance(0.31, 1.5, 1.2) > 0.0);
}

// ---------------------------------------------------------------------------
// Straddle parity
// ---------------------------------------------------------------------------

TEST_CASE("straddle parity dominates intrinsic value") {
    const double forward = 1.1;
    for (double strike : {0.6, 1.0, 1.1, 1.6}) {
        for (double v : {0.01, 0.09, 0.5}) {
            const double call = bs_call(forward, strike, v);
            const double straddle =
                straddle_price_from_call(call, forward, strike);
            CHECK(straddle >= std::abs(forward - strike) - 1e-12);
            // Inverting the parity relation recovers the call.
            CHECK(0.5 * (straddle + forward - strike) ==
                  doctest::Approx(call).epsilon(1e-14));
        }
    }
}
