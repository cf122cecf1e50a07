// Market data generation and I/O: exact discrete-measure pricing, lognormal
// dataset synthesis, a Monte Carlo pricing oracle, and JSON/CSV file formats.
#pragma once

#include "arbbounds/pricing.hpp"

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace arbbounds {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

enum class PayoffKind { Call, Straddle, Forward };

const char* to_string(PayoffKind kind);
PayoffKind payoff_kind_from_string(const std::string& name);

// Finitely supported joint distribution of the asset vector at maturity.
struct DiscreteMeasure {
    std::vector<Eigen::VectorXd> atoms;  // componentwise >= 0
    Eigen::VectorXd probabilities;       // nonnegative, sums to 1 within 1e-12

    void validate() const;
};

// One quoted instrument on the basket w'x: call (w'x-K)+, straddle |w'x-K|,
// or forward w'x - K.
struct Instrument {
    Eigen::VectorXd weights;
    double strike = 0.0;
    PayoffKind kind = PayoffKind::Call;
    double price = 0.0;
};

// A full quote set for one maturity.  Forward prices live in `forwards`;
// `instruments` holds the optional quotes.
struct MarketData {
    int n = 0;
    double maturity = 1.0;
    Eigen::VectorXd forwards;
    std::vector<Instrument> instruments;

    // Throws std::invalid_argument on structural violations (dimension
    // mismatch, negative or nonfinite prices, forward instruments without
    // strike 0 and a unit weight vector).  Returns human-readable warnings
    // for quotes that violate the static arbitrage envelope; such quotes are
    // legal inputs and the bound computations will expose them.
    std::vector<std::string> validate() const;
};

// Instrument to be priced when generating a dataset.
struct InstrumentSpec {
    Eigen::VectorXd weights;
    double strike = 0.0;
    PayoffKind kind = PayoffKind::Call;
};

// Basket call to be priced under the lognormal approximation; when
// at_the_money is set the strike is replaced by w'F.
struct BasketSpec {
    Eigen::VectorXd weights;
    double strike = 0.0;
    bool at_the_money = false;
};

// One output row of a bounds computation.  Columns that a given method does
// not produce stay unset and serialize as empty CSV fields.
struct ResultRow {
    double strike = 0.0;
    std::optional<double> outer_lower, inner_lower, model_lower;
    std::optional<double> model_upper, inner_upper, outer_upper;
    std::string status = "ok";
};

struct McEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

// ---------------------------------------------------------------------------
// Pricing under a discrete measure
// ---------------------------------------------------------------------------

// Payoff of one instrument kind at basket value v.
double payoff(PayoffKind kind, double basket_value, double strike);

// Exact expectation of the payoff under the measure.
double discrete_price(const DiscreteMeasure& measure,
                      const Eigen::VectorXd& weights, double strike,
                      PayoffKind kind);

// ---------------------------------------------------------------------------
// Dataset generation
// ---------------------------------------------------------------------------

// Prices every spec under the measure and appends the forward vector E[x].
MarketData generate_discrete_dataset(const DiscreteMeasure& measure,
                                     const std::vector<InstrumentSpec>& specs,
                                     double maturity = 1.0);

// Prices basket calls under the moment-matched lognormal approximation.
MarketData generate_lognormal_dataset(const CovarianceModel& model,
                                      double maturity,
                                      const std::vector<BasketSpec>& specs);

// Plain Monte Carlo basket call price under the exact multivariate lognormal
// terminal law.  Deterministic for a fixed seed; single threaded.
// Requires samples >= 1000 and covariance eigenvalues >= -1e-8 (negative
// eigenvalues within tolerance are clipped to zero).
McEstimate monte_carlo_basket_price(const CovarianceModel& model,
                                    double maturity,
                                    const Eigen::VectorXd& weights,
                                    double strike, long samples,
                                    std::uint64_t seed);

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

// JSON schema: { "n": int, "maturity": number, "forwards": [number],
//                "instruments": [ { "weights": [number], "strike": number,
//                                   "kind": "call"|"straddle"|"forward",
//                                   "price": number } ] }
// Schema violations throw std::runtime_error naming the offending field
// path; envelope violations are appended to *warnings when given.
MarketData load_market_data(const std::string& path,
                            std::vector<std::string>* warnings = nullptr);

void save_market_data(const std::string& path, const MarketData& data);

// CSV with header strike,outer_lower,inner_lower,model_lower,model_upper,
// inner_upper,outer_upper,status.  Unset columns are left empty; numbers are
// rendered shortest-roundtrip so identical inputs give identical bytes.
std::string format_results_csv(const std::vector<ResultRow>& rows);

void save_results(const std::string& path,
                  const std::vector<ResultRow>& rows);

}  // namespace arbbounds
