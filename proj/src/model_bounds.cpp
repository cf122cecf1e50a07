#include "arbbounds/model_bounds.hpp"

#include "arbbounds/semidefinite_program.hpp"

#include <cmath>
#include <limits>

namespace arbbounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string instrument_label(int index) {
    return "instruments[" + std::to_string(index) + "]";
}

// BS price as a function of total variance, extended to V = +inf where the
// call price saturates at the forward.
double price_from_variance(double basket_forward, double strike,
                           double total_variance) {
    if (std::isinf(total_variance)) {
        return basket_forward;
    }
    if (strike <= 0.0) {
        return basket_forward - strike;
    }
    return bs_call(basket_forward, strike, total_variance);
}

}  // namespace

// ---------------------------------------------------------------------------
// Quote calibration
// ---------------------------------------------------------------------------

std::vector<VarianceConstraint> build_variance_constraints(
    const MarketData& data) {
    data.validate();
    std::vector<VarianceConstraint> constraints;
    for (std::size_t i = 0; i < data.instruments.size(); ++i) {
        const auto& inst = data.instruments[i];
        if (inst.kind == PayoffKind::Forward) {
            continue;  // forwards already live inside the effective weights
        }
        if ((inst.weights.array() < 0.0).any()) {
            throw std::invalid_argument(
                instrument_label(static_cast<int>(i)) +
                ": negative weights are outside the lognormal "
                "approximation domain");
        }
        const double basket_forward = inst.weights.dot(data.forwards);
        if (!(basket_forward > 0.0)) {
            throw std::invalid_argument(
                instrument_label(static_cast<int>(i)) +
                ": basket forward w'F must be positive");
        }
        if (!(inst.strike > 0.0)) {
            throw std::invalid_argument(
                instrument_label(static_cast<int>(i)) +
                ": a call with nonpositive strike carries no variance "
                "information");
        }
        double call_price = inst.price;
        if (inst.kind == PayoffKind::Straddle) {
            call_price = call_price_from_straddle(inst.price, basket_forward,
                                                  inst.strike);
        }
        VarianceConstraint c;
        try {
            c.total_variance =
                implied_variance(call_price, basket_forward, inst.strike);
        } catch (const PriceOutOfRange& e) {
            throw PriceOutOfRange(instrument_label(static_cast<int>(i)) +
                                  ": " + e.what());
        }
        c.loading = effective_weights(inst.weights, data.forwards).outer;
        c.source_index = static_cast<int>(i);
        constraints.push_back(std::move(c));
    }
    return constraints;
}

// ---------------------------------------------------------------------------
// Bound computation
// ---------------------------------------------------------------------------

ModelBoundsResult model_price_bounds(const MarketData& data,
                                     const Basket& target,
                                     const SolverOptions& options) {
    if (target.weights.size() != data.n) {
        throw std::invalid_argument(
            "target weights do not match the market data dimension");
    }
    if ((target.weights.array() < 0.0).any()) {
        throw std::invalid_argument(
            "target basket must have nonnegative weights");
    }
    if (std::abs(target.maturity - data.maturity) >
        1e-12 * std::max(1.0, data.maturity)) {
        throw std::invalid_argument(
            "target maturity differs from the quoted maturity; only a "
            "single maturity is supported");
    }
    const double basket_forward = target.weights.dot(data.forwards);
    if (!(basket_forward > 0.0)) {
        throw std::invalid_argument(
            "target basket forward w'F must be positive");
    }

    const auto constraints = build_variance_constraints(data);
    const double maturity = data.maturity;

    SemidefiniteProgram sdp;
    sdp.dim = data.n;
    sdp.objective = effective_weights(target.weights, data.forwards).outer;
    for (const auto& c : constraints) {
        sdp.equalities.emplace_back(c.loading, c.total_variance / maturity);
    }

    ModelBoundsResult out;
    out.variance_lower = kNaN;
    out.variance_upper = kNaN;
    out.price_lower = kNaN;
    out.price_upper = kNaN;

    sdp.sense = Sense::Minimize;
    const SdpSolution low = solve_sdp(sdp, options);
    out.lower_status = low.status;
    switch (low.status) {
        case SolveStatus::Optimal:
            out.variance_lower = std::max(low.objective, 0.0) * maturity;
            out.price_lower = price_from_variance(basket_forward,
                                                  target.strike,
                                                  out.variance_lower);
            out.covariance_lower = low.X;
            break;
        case SolveStatus::Infeasible:
            // The feasible set is empty, so both bounds fail the same way
            // and the second solve is pointless.
            out.upper_status = SolveStatus::Infeasible;
            out.farkas = low.farkas;
            out.message =
                "no positive semidefinite covariance reproduces the quoted "
                "implied variances (dynamic arbitrage among the quotes)";
            return out;
        default:
            out.message = "lower variance bound: " + low.message;
            break;
    }

    sdp.sense = Sense::Maximize;
    const SdpSolution high = solve_sdp(sdp, options);
    out.upper_status = high.status;
    switch (high.status) {
        case SolveStatus::Optimal:
            out.variance_upper = std::max(high.objective, 0.0) * maturity;
            out.price_upper = price_from_variance(basket_forward,
                                                  target.strike,
                                                  out.variance_upper);
            out.covariance_upper = high.X;
            break;
        case SolveStatus::Unbounded:
            // The quotes do not cap the target variance; the BS price still
            // saturates at the basket forward as V grows.
            out.variance_upper = kInf;
            out.price_upper = basket_forward;
            break;
        case SolveStatus::Infeasible:
            out.farkas = high.farkas;
            out.message =
                "no positive semidefinite covariance reproduces the quoted "
                "implied variances (dynamic arbitrage among the quotes)";
            break;
        default:
            if (!out.message.empty()) {
                out.message += "; ";
            }
            out.message += "upper variance bound: " + high.message;
            break;
    }
    return out;
}

}  // namespace arbbounds
