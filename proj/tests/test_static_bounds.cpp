#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "arbbounds/static_bounds.hpp"

#include <cmath>
#include <stdexcept>

using namespace arbbounds;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> vals) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v[i++] = x;
    return v;
}

// Two-asset reference market: six atoms on the unit box at multiples of 0.1
// with forwards (0.43, 0.52), quoted through seven basket calls.  The
// two-asset index call at strike 1 prices at 0.24 under this measure.
DiscreteMeasure six_atom_measure() {
    DiscreteMeasure m;
    m.atoms = {vec({0.0, 0.0}), vec({0.0, 0.8}), vec({0.8, 0.3}),
               vec({0.6, 0.6}), vec({0.1, 0.4}), vec({1.0, 1.0})};
    m.probabilities = vec({0.2, 0.2, 0.2, 0.1, 0.1, 0.2});
    return m;
}

std::vector<InstrumentSpec> seven_call_specs() {
    std::vector<InstrumentSpec> specs;
    auto add = [&](std::initializer_list<double> w, double strike) {
        InstrumentSpec s;
        s.weights = vec(w);
        s.strike = strike;
        s.kind = PayoffKind::Call;
        specs.push_back(s);
    };
    add({0.2, 1.0}, 0.1);
    add({0.5, 0.8}, 0.8);
    add({0.5, 0.3}, 0.4);
    add({1.0, 0.3}, 0.5);
    add({1.0, 0.5}, 0.5);
    add({1.0, 0.4}, 1.0);
    add({1.0, 0.6}, 1.2);
    return specs;
}

MarketData reference_market() {
    return generate_discrete_dataset(six_atom_measure(), seven_call_specs());
}

Basket index_call(double strike) {
    Basket b;
    b.weights = vec({1.0, 1.0});
    b.strike = strike;
    b.maturity = 1.0;
    return b;
}

// Mark-to-payoff value of an arbitrage certificate at terminal assets x.
// All price points are call payoffs after straddle conversion.
double certificate_payoff(const ArbitrageCertificate& cert,
                          const Eigen::VectorXd& x) {
    double value = cert.cash;
    for (std::size_t i = 0; i < cert.points.size(); ++i) {
        double basket = cert.points[i].weights.dot(x);
        value += cert.positions(static_cast<int>(i)) *
                 std::max(basket - cert.points[i].strike, 0.0);
    }
    return value;
}

}  // namespace

// ---------------------------------------------------------------------------
// Price points
// ---------------------------------------------------------------------------

TEST_CASE("price points cover forwards and quotes with straddles converted") {
    MarketData data = reference_market();
    std::vector<PricePoint> points = build_price_points(data);
    REQUIRE(points.size() == 9);  // 2 forwards + 7 quotes

    CHECK(points[0].role == PricePoint::Role::Forward);
    CHECK(points[0].weights == vec({1.0, 0.0}));
    CHECK(points[0].strike == 0.0);
    CHECK(points[0].price == doctest::Approx(0.43).epsilon(1e-12));
    CHECK(points[1].price == doctest::Approx(0.52).epsilon(1e-12));

    // Replace the first call by its parity-equivalent straddle: the point
    // set must come out identical.
    MarketData with_straddle = data;
    double basket_forward = data.instruments[0].weights.dot(data.forwards);
    with_straddle.instruments[0].kind = PayoffKind::Straddle;
    with_straddle.instruments[0].price = straddle_price_from_call(
        data.instruments[0].price, basket_forward, data.instruments[0].strike);
    std::vector<PricePoint> converted = build_price_points(with_straddle);
    REQUIRE(converted.size() == points.size());
    CHECK(converted[2].price ==
          doctest::Approx(points[2].price).epsilon(1e-12));
}

TEST_CASE("duplicate coordinates merge when consistent and throw otherwise") {
    MarketData data;
    data.n = 2;
    data.forwards = vec({1.0, 2.0});
    Instrument quote;
    quote.weights = vec({0.5, 0.5});
    quote.strike = 0.5;
    quote.price = 1.1;
    data.instruments = {quote, quote};  // exact duplicate merges
    CHECK(build_price_points(data).size() == 3);

    data.instruments[1].price = 1.2;
    CHECK_THROWS_WITH_AS(build_price_points(data),
                         doctest::Contains("conflicting prices"),
                         std::invalid_argument);

    // A forward-kind instrument restating a quoted forward at another price
    // conflicts with the forward point.
    MarketData fwd = reference_market();
    Instrument restated;
    restated.weights = vec({1.0, 0.0});
    restated.strike = 0.0;
    restated.kind = PayoffKind::Forward;
    restated.price = 0.5;  // forwards[0] says 0.43
    fwd.instruments.push_back(restated);
    CHECK_THROWS_WITH_AS(build_price_points(fwd),
                         doctest::Contains("forwards[0]"),
                         std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Outer bounds
// ---------------------------------------------------------------------------

TEST_CASE("target equal to a quoted instrument is pinned to its price") {
    MarketData data = reference_market();
    Basket target;
    target.weights = data.instruments[0].weights;
    target.strike = data.instruments[0].strike;
    target.maturity = 1.0;

    OuterBoundsResult r = outer_bounds(data, target);
    REQUIRE(r.lower_status == SolveStatus::Optimal);
    REQUIRE(r.upper_status == SolveStatus::Optimal);
    CHECK(r.lower == doctest::Approx(data.instruments[0].price).epsilon(1e-6));
    CHECK(r.upper == doctest::Approx(data.instruments[0].price).epsilon(1e-6));
}

TEST_CASE("forwards-only market has the analytic LP bounds") {
    MarketData data;
    data.n = 2;
    data.forwards = vec({1.0, 2.0});

    // Single-asset target: upper is the basket forward w'F, lower its
    // intrinsic value (w'F - K)+.
    Basket target;
    target.weights = vec({1.0, 0.0});
    target.strike = 0.4;
    OuterBoundsResult r = outer_bounds(data, target);
    REQUIRE(r.lower_status == SolveStatus::Optimal);
    REQUIRE(r.upper_status == SolveStatus::Optimal);
    CHECK(r.lower == doctest::Approx(0.6).epsilon(1e-7));
    CHECK(r.upper == doctest::Approx(1.0).epsilon(1e-7));

    target.strike = 1.5;  // out of the money: lower collapses to zero
    r = outer_bounds(data, target);
    CHECK(r.lower == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(r.upper == doctest::Approx(1.0).epsilon(1e-7));

    // Mixed basket: the upper bound is still w'F, but the lower bound of
    // this relaxation is max_k (S_k w_k - K)+, not (w'F - K)+.  Only the
    // homogeneity-pinned component g_{k,k} = S_k of each forward's
    // subgradient forces the target price, one asset at a time.
    target.weights = vec({0.5, 0.5});
    target.strike = 0.25;
    r = outer_bounds(data, target);
    CHECK(r.lower == doctest::Approx(0.75).epsilon(1e-7));   // 2 * 0.5 - 0.25
    CHECK(r.upper == doctest::Approx(1.5).epsilon(1e-7));    // w'F
}

TEST_CASE("outer interval brackets the generating-measure price at strike 1") {
    MarketData data = reference_market();
    OuterBoundsResult r = outer_bounds(data, index_call(1.0));
    REQUIRE(r.lower_status == SolveStatus::Optimal);
    REQUIRE(r.upper_status == SolveStatus::Optimal);
    CHECK(r.lower <= 0.24 + 1e-8);
    CHECK(r.upper >= 0.24 - 1e-8);
    CHECK(r.lower >= -1e-8);
    CHECK(r.upper <= 0.95 + 1e-8);  // never above the basket forward

    // Certificates: subgradients obey the sign pattern and support the
    // surface (homogeneity at every point).
    for (const Eigen::MatrixXd* g : {&r.lower_subgradients, &r.upper_subgradients}) {
        REQUIRE(g->rows() == static_cast<Eigen::Index>(r.points.size()));
        REQUIRE(g->cols() == 3);
        CHECK(g->leftCols(2).minCoeff() >= -1e-8);
        CHECK(g->col(2).maxCoeff() <= 1e-8);
        CHECK(g->col(2).minCoeff() >= -1.0 - 1e-8);
    }
    double bound = r.lower;
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        Eigen::VectorXd z(3);
        z << r.points[i].weights, r.points[i].strike;
        double price = i == 0 ? bound : r.points[i].price;
        CHECK(r.lower_subgradients.row(static_cast<int>(i)).dot(z) ==
              doctest::Approx(price).epsilon(1e-6));
    }
}

TEST_CASE("outer intervals tighten as quotes accumulate") {
    MarketData full = reference_market();
    double prev_lower = -1e100;
    double prev_upper = 1e100;
    for (int k = 0; k <= 7; ++k) {
        MarketData data = full;
        data.instruments.resize(k);
        OuterBoundsResult r = outer_bounds(data, index_call(1.0));
        REQUIRE(r.lower_status == SolveStatus::Optimal);
        REQUIRE(r.upper_status == SolveStatus::Optimal);
        CHECK(r.lower >= prev_lower - 1e-7);
        CHECK(r.upper <= prev_upper + 1e-7);
        CHECK(r.lower <= 0.24 + 1e-7);
        CHECK(r.upper >= 0.24 - 1e-7);
        prev_lower = r.lower;
        prev_upper = r.upper;
    }
}

TEST_CASE("outer bounds scale linearly with prices, forwards and strikes") {
    MarketData data = reference_market();
    OuterBoundsResult base = outer_bounds(data, index_call(1.0));

    const double c = 2.5;
    MarketData scaled = data;
    scaled.forwards *= c;
    for (Instrument& inst : scaled.instruments) {
        inst.strike *= c;
        inst.price *= c;
    }
    OuterBoundsResult r = outer_bounds(scaled, index_call(c));
    CHECK(r.lower == doctest::Approx(c * base.lower).epsilon(1e-6));
    CHECK(r.upper == doctest::Approx(c * base.upper).epsilon(1e-6));
}

TEST_CASE("outer bounds validate the target") {
    MarketData data = reference_market();
    Basket bad = index_call(1.0);
    bad.weights = vec({1.0, 1.0, 1.0});
    CHECK_THROWS_AS(outer_bounds(data, bad), std::invalid_argument);

    bad = index_call(1.0);
    bad.weights(0) = -0.1;
    CHECK_THROWS_AS(outer_bounds(data, bad), std::invalid_argument);

    bad = index_call(1.0);
    bad.maturity = 0.5;
    CHECK_THROWS_WITH_AS(outer_bounds(data, bad),
                         doctest::Contains("maturity"), std::invalid_argument);

    bad = index_call(-0.5);
    CHECK_THROWS_AS(outer_bounds(data, bad), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Arbitrage check
// ---------------------------------------------------------------------------

TEST_CASE("measure-generated quotes are consistent") {
    StaticArbitrageCheck check = check_static_arbitrage(reference_market());
    CHECK(check.consistent);
    CHECK(check.message.find("consistent") != std::string::npos);
}

TEST_CASE("a quote above the basket forward is an arbitrage") {
    MarketData data;
    data.n = 2;
    data.forwards = vec({1.0, 1.0});
    Instrument quote;
    quote.weights = vec({0.5, 0.5});
    quote.strike = 0.1;
    quote.price = 1.05;  // above w'F = 1
    data.instruments = {quote};

    StaticArbitrageCheck check = check_static_arbitrage(data);
    REQUIRE_FALSE(check.consistent);
    const ArbitrageCertificate& cert = check.certificate;
    CHECK(cert.cost < -1e-6);
    CHECK(cert.cost == doctest::Approx(-cert.farkas.violation).epsilon(1e-8));
    CHECK(cert.cash >= -1e-10);
    REQUIRE(cert.points.size() == 3);
    CHECK(cert.positions(2) < 0.0);  // short the overpriced call

    // The portfolio payoff is nonnegative across terminal asset values.
    for (double x1 = 0.0; x1 <= 3.0; x1 += 0.1) {
        for (double x2 = 0.0; x2 <= 3.0; x2 += 0.1) {
            CHECK(certificate_payoff(cert, vec({x1, x2})) >= -1e-7);
        }
    }
}

TEST_CASE("a convexity-violating quote triple is an arbitrage") {
    MarketData data;
    data.n = 1;
    data.forwards = vec({1.0});
    auto call = [&](double strike, double price) {
        Instrument inst;
        inst.weights = vec({1.0});
        inst.strike = strike;
        inst.price = price;
        return inst;
    };
    // The middle quote is above the chord of its neighbors: a butterfly
    // centered at 0.5 is free money.
    data.instruments = {call(0.4, 0.62), call(0.5, 0.58), call(0.6, 0.50)};

    StaticArbitrageCheck check = check_static_arbitrage(data);
    REQUIRE_FALSE(check.consistent);
    CHECK(check.certificate.cost < -1e-6);
    for (double x = 0.0; x <= 5.0; x += 0.01) {
        CHECK(certificate_payoff(check.certificate, vec({x})) >= -1e-7);
    }

    // Restoring convexity removes the arbitrage.
    data.instruments[1].price = 0.55;
    CHECK(check_static_arbitrage(data).consistent);
}

TEST_CASE("outer bounds report infeasibility on arbitrageable quotes") {
    MarketData data;
    data.n = 1;
    data.forwards = vec({1.0});
    Instrument inst;
    inst.weights = vec({1.0});
    inst.strike = 0.4;
    inst.price = 1.1;  // above the forward
    data.instruments = {inst};

    Basket target;
    target.weights = vec({1.0});
    target.strike = 0.5;
    OuterBoundsResult r = outer_bounds(data, target);
    CHECK(r.lower_status == SolveStatus::Infeasible);
    CHECK(r.upper_status == SolveStatus::Infeasible);
    CHECK(std::isnan(r.lower));
    CHECK(std::isnan(r.upper));
    CHECK(r.farkas.violation > 1e-9);
    CHECK(r.message.find("static arbitrage") != std::string::npos);
}

// ---------------------------------------------------------------------------
// Inner bounds
// ---------------------------------------------------------------------------

TEST_CASE("inner interval brackets the generating-measure price at strike 1") {
    MarketData data = reference_market();
    for (int bins : {10, 20}) {
        GridSpec grid = GridSpec::cube(2, 0.0, 1.0, bins);
        InnerBoundsResult r = inner_bounds(data, index_call(1.0), grid);
        REQUIRE(r.lower_status == SolveStatus::Optimal);
        REQUIRE(r.upper_status == SolveStatus::Optimal);
        CHECK(r.lower <= 0.24 + 1e-7);
        CHECK(r.upper >= 0.24 - 1e-7);

        // Witnesses are feasible distributions repricing every input.
        for (const DiscreteMeasure* w : {&r.lower_witness, &r.upper_witness}) {
            w->validate();
            for (int i = 0; i < data.n; ++i) {
                Eigen::VectorXd unit = Eigen::VectorXd::Unit(2, i);
                CHECK(discrete_price(*w, unit, 0.0, PayoffKind::Forward) ==
                      doctest::Approx(data.forwards(i)).epsilon(1e-6));
            }
            for (const Instrument& inst : data.instruments) {
                CHECK(discrete_price(*w, inst.weights, inst.strike, inst.kind) ==
                      doctest::Approx(inst.price).epsilon(1e-6));
            }
        }
        CHECK(discrete_price(r.lower_witness, vec({1.0, 1.0}), 1.0,
                             PayoffKind::Call) ==
              doctest::Approx(r.lower).epsilon(1e-6));
        CHECK(discrete_price(r.upper_witness, vec({1.0, 1.0}), 1.0,
                             PayoffKind::Call) ==
              doctest::Approx(r.upper).epsilon(1e-6));
    }
}

TEST_CASE("inner intervals sit inside outer intervals across strikes") {
    MarketData data = reference_market();
    GridSpec grid = GridSpec::cube(2, 0.0, 1.0, 10);
    for (double strike : {0.0, 0.5, 1.0, 1.5, 2.0}) {
        OuterBoundsResult outer = outer_bounds(data, index_call(strike));
        InnerBoundsResult inner = inner_bounds(data, index_call(strike), grid);
        REQUIRE(outer.lower_status == SolveStatus::Optimal);
        REQUIRE(inner.lower_status == SolveStatus::Optimal);
        CHECK(outer.lower <= inner.lower + 1e-6);
        CHECK(inner.lower <= inner.upper + 1e-6);
        CHECK(inner.upper <= outer.upper + 1e-6);
    }

    // At strike 0 the index call is the basket forward: forced by the
    // forward-matching rows, so the inner interval degenerates to w'F.
    InnerBoundsResult at_zero = inner_bounds(data, index_call(0.0), grid);
    CHECK(at_zero.lower == doctest::Approx(0.95).epsilon(1e-7));
    CHECK(at_zero.upper == doctest::Approx(0.95).epsilon(1e-7));
}

TEST_CASE("inner intervals tighten as quotes accumulate") {
    MarketData full = reference_market();
    GridSpec grid = GridSpec::cube(2, 0.0, 1.0, 10);
    double prev_lower = -1e100;
    double prev_upper = 1e100;
    for (int k = 0; k <= 7; ++k) {
        MarketData data = full;
        data.instruments.resize(k);
        InnerBoundsResult r = inner_bounds(data, index_call(1.0), grid);
        REQUIRE(r.lower_status == SolveStatus::Optimal);
        REQUIRE(r.upper_status == SolveStatus::Optimal);
        CHECK(r.lower >= prev_lower - 1e-7);
        CHECK(r.upper <= prev_upper + 1e-7);
        prev_lower = r.lower;
        prev_upper = r.upper;
    }
}

TEST_CASE("grid refinement can only widen inner intervals") {
    MarketData data = reference_market();
    GridSpec coarse = GridSpec::cube(2, 0.0, 1.0, 10);
    GridSpec fine = GridSpec::cube(2, 0.0, 1.0, 20);
    InnerBoundsResult a = inner_bounds(data, index_call(1.0), coarse);
    InnerBoundsResult b = inner_bounds(data, index_call(1.0), fine);
    CHECK(b.lower <= a.lower + 1e-7);
    CHECK(b.upper >= a.upper - 1e-7);
}

TEST_CASE("single forward with a strike-zero call target is pinned") {
    MarketData data;
    data.n = 1;
    data.forwards = vec({0.75});

    Basket target;
    target.weights = vec({1.0});
    target.strike = 0.0;

    GridSpec grid = GridSpec::cube(1, 0.0, 1.5, 2);  // atoms 0, 0.75, 1.5
    InnerBoundsResult inner = inner_bounds(data, target, grid);
    CHECK(inner.lower == doctest::Approx(0.75).epsilon(1e-8));
    CHECK(inner.upper == doctest::Approx(0.75).epsilon(1e-8));

    OuterBoundsResult outer = outer_bounds(data, target);
    CHECK(outer.lower == doctest::Approx(0.75).epsilon(1e-8));
    CHECK(outer.upper == doctest::Approx(0.75).epsilon(1e-8));
}

TEST_CASE("univariate bounds agree with inner bounds at quoted strikes") {
    DiscreteMeasure m;
    m.atoms = {vec({0.0}), vec({0.5}), vec({1.0}), vec({1.5})};
    m.probabilities = vec({0.2, 0.3, 0.3, 0.2});
    std::vector<InstrumentSpec> specs(2);
    specs[0].weights = vec({1.0});
    specs[0].strike = 0.5;
    specs[1].weights = vec({1.0});
    specs[1].strike = 1.0;
    MarketData data = generate_discrete_dataset(m, specs);
    REQUIRE(data.forwards(0) == doctest::Approx(0.75).epsilon(1e-12));
    REQUIRE(data.instruments[0].price == doctest::Approx(0.35).epsilon(1e-12));
    REQUIRE(data.instruments[1].price == doctest::Approx(0.10).epsilon(1e-12));

    GridSpec grid = GridSpec::cube(1, 0.0, 1.5, 3);  // the atom lattice
    for (double strike : {0.5, 1.0}) {
        Basket target;
        target.weights = vec({1.0});
        target.strike = strike;
        OuterBoundsResult outer = outer_bounds(data, target);
        InnerBoundsResult inner = inner_bounds(data, target, grid);
        double quote = strike == 0.5 ? 0.35 : 0.10;
        CHECK(outer.lower == doctest::Approx(quote).epsilon(1e-6));
        CHECK(outer.upper == doctest::Approx(quote).epsilon(1e-6));
        CHECK(inner.lower == doctest::Approx(quote).epsilon(1e-6));
        CHECK(inner.upper == doctest::Approx(quote).epsilon(1e-6));
    }
}

TEST_CASE("an unreachable quote set on the grid reports infeasibility") {
    MarketData data;
    data.n = 1;
    data.forwards = vec({0.75});
    Instrument inst;
    inst.weights = vec({1.0});
    inst.strike = 0.5;
    inst.price = 0.35;
    data.instruments = {inst};

    Basket target;
    target.weights = vec({1.0});
    target.strike = 0.75;

    // Atoms {0, 1} force E(x - 0.5)+ = 0.5 E x = 0.375, not 0.35.
    GridSpec grid = GridSpec::cube(1, 0.0, 1.0, 1);
    InnerBoundsResult r = inner_bounds(data, target, grid);
    CHECK(r.lower_status == SolveStatus::Infeasible);
    CHECK(r.upper_status == SolveStatus::Infeasible);
    CHECK(r.message.find("refine the grid") != std::string::npos);
}

TEST_CASE("grid specification is validated") {
    MarketData data = reference_market();
    Basket target = index_call(1.0);

    GridSpec grid = GridSpec::cube(2, 0.0, 1.0, 400);  // 401^2 atoms
    CHECK_THROWS_WITH_AS(inner_bounds(data, target, grid),
                         doctest::Contains("cap"), std::invalid_argument);

    grid = GridSpec::cube(2, -0.5, 1.0, 10);
    CHECK_THROWS_WITH_AS(inner_bounds(data, target, grid),
                         doctest::Contains("below zero"), std::invalid_argument);

    grid = GridSpec::cube(2, 1.0, 1.0, 10);
    CHECK_THROWS_AS(inner_bounds(data, target, grid), std::invalid_argument);

    grid = GridSpec::cube(2, 0.0, 1.0, 0);
    CHECK_THROWS_AS(inner_bounds(data, target, grid), std::invalid_argument);

    grid = GridSpec::cube(3, 0.0, 1.0, 10);
    CHECK_THROWS_WITH_AS(inner_bounds(data, target, grid),
                         doctest::Contains("dimension"), std::invalid_argument);

    // Defaulted box: empty bounds mean the unit box.
    GridSpec defaulted;
    defaulted.bins = 10;
    InnerBoundsResult r = inner_bounds(data, target, defaulted);
    CHECK(r.lower_status == SolveStatus::Optimal);
}
