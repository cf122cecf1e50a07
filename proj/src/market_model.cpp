#include "arbbounds/market_model.hpp"

#include "json.hpp"

#include <Eigen/Eigenvalues>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace arbbounds {

namespace {

using nlohmann::ordered_json;

constexpr double kProbabilityTol = 1e-12;
constexpr double kEnvelopeTol = 1e-9;

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

bool is_unit_vector(const Eigen::VectorXd& w) {
    int ones = 0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] == 1.0) {
            ++ones;
        } else if (w[i] != 0.0) {
            return false;
        }
    }
    return ones == 1;
}

}  // namespace

// ---------------------------------------------------------------------------
// Payoff kinds
// ---------------------------------------------------------------------------

const char* to_string(PayoffKind kind) {
    switch (kind) {
        case PayoffKind::Call: return "call";
        case PayoffKind::Straddle: return "straddle";
        case PayoffKind::Forward: return "forward";
    }
    return "?";
}

PayoffKind payoff_kind_from_string(const std::string& name) {
    if (name == "call") return PayoffKind::Call;
    if (name == "straddle") return PayoffKind::Straddle;
    if (name == "forward") return PayoffKind::Forward;
    throw std::invalid_argument("unknown payoff kind \"" + name +
                                "\" (expected call, straddle, or forward)");
}

double payoff(PayoffKind kind, double basket_value, double strike) {
    const double moneyness = basket_value - strike;
    switch (kind) {
        case PayoffKind::Call: return std::max(moneyness, 0.0);
        case PayoffKind::Straddle: return std::abs(moneyness);
        case PayoffKind::Forward: return moneyness;
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

void DiscreteMeasure::validate() const {
    if (atoms.empty()) {
        throw std::invalid_argument("measure has no atoms");
    }
    const auto dim = atoms.front().size();
    if (dim == 0) {
        throw std::invalid_argument("measure atoms have dimension zero");
    }
    for (const auto& atom : atoms) {
        if (atom.size() != dim) {
            throw std::invalid_argument("measure atoms differ in dimension");
        }
        if (!atom.allFinite() || (atom.array() < 0.0).any()) {
            throw std::invalid_argument(
                "measure atoms must be componentwise nonnegative");
        }
    }
    if (probabilities.size() != static_cast<Eigen::Index>(atoms.size())) {
        throw std::invalid_argument(
            "probability count does not match atom count");
    }
    if (!probabilities.allFinite() || (probabilities.array() < 0.0).any()) {
        throw std::invalid_argument("probabilities must be nonnegative");
    }
    if (std::abs(probabilities.sum() - 1.0) > kProbabilityTol) {
        throw std::invalid_argument("probabilities must sum to 1");
    }
}

std::vector<std::string> MarketData::validate() const {
    if (n <= 0) {
        throw std::invalid_argument("asset count must be positive");
    }
    if (forwards.size() != n) {
        throw std::invalid_argument(
            "forward vector does not match the asset count");
    }
    if (!forwards.allFinite() || (forwards.array() < 0.0).any()) {
        throw std::invalid_argument("forwards must be finite and nonnegative");
    }
    if (!(maturity > 0.0) || !std::isfinite(maturity)) {
        throw std::invalid_argument("maturity must be positive");
    }
    std::vector<std::string> warnings;
    for (std::size_t i = 0; i < instruments.size(); ++i) {
        const auto& inst = instruments[i];
        const std::string label = "instruments[" + std::to_string(i) + "]";
        if (inst.weights.size() != n) {
            throw std::invalid_argument(
                label + ": weight vector does not match the asset count");
        }
        if (!inst.weights.allFinite() || !std::isfinite(inst.strike)) {
            throw std::invalid_argument(label + ": nonfinite weights or strike");
        }
        if (!(inst.price >= 0.0) || !std::isfinite(inst.price)) {
            throw std::invalid_argument(
                label + ": price must be finite and nonnegative");
        }
        if (inst.kind == PayoffKind::Forward) {
            if (inst.strike != 0.0 || !is_unit_vector(inst.weights)) {
                throw std::invalid_argument(
                    label +
                    ": forward instruments require strike 0 and a unit "
                    "weight vector");
            }
        }
        // Static arbitrage envelope checks against the forwards; violations
        // are reported, not rejected, since detecting them is the point of
        // the bound computations.
        const double basket_forward = inst.weights.dot(forwards);
        const double intrinsic =
            payoff(inst.kind, basket_forward, inst.strike);
        if (inst.kind != PayoffKind::Forward &&
            inst.price < intrinsic - kEnvelopeTol) {
            warnings.push_back(label + ": price " + format_double(inst.price) +
                               " is below the intrinsic value " +
                               format_double(intrinsic));
        }
        if (inst.kind == PayoffKind::Call &&
            (inst.weights.array() >= 0.0).all() &&
            inst.price > basket_forward + kEnvelopeTol) {
            warnings.push_back(label + ": price " + format_double(inst.price) +
                               " exceeds the basket forward " +
                               format_double(basket_forward));
        }
    }
    return warnings;
}

// ---------------------------------------------------------------------------
// Discrete pricing and dataset generation
// ---------------------------------------------------------------------------

double discrete_price(const DiscreteMeasure& measure,
                      const Eigen::VectorXd& weights, double strike,
                      PayoffKind kind) {
    measure.validate();
    if (weights.size() != measure.atoms.front().size()) {
        throw std::invalid_argument(
            "weights do not match the measure dimension");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < measure.atoms.size(); ++k) {
        total += measure.probabilities[static_cast<Eigen::Index>(k)] *
                 payoff(kind, weights.dot(measure.atoms[k]), strike);
    }
    return total;
}

MarketData generate_discrete_dataset(const DiscreteMeasure& measure,
                                     const std::vector<InstrumentSpec>& specs,
                                     double maturity) {
    measure.validate();
    const auto dim = measure.atoms.front().size();
    MarketData data;
    data.n = static_cast<int>(dim);
    data.maturity = maturity;
    data.forwards = Eigen::VectorXd::Zero(dim);
    for (std::size_t k = 0; k < measure.atoms.size(); ++k) {
        data.forwards +=
            measure.probabilities[static_cast<Eigen::Index>(k)] *
            measure.atoms[k];
    }
    data.instruments.reserve(specs.size());
    for (const auto& spec : specs) {
        Instrument inst;
        inst.weights = spec.weights;
        inst.strike = spec.strike;
        inst.kind = spec.kind;
        inst.price = discrete_price(measure, spec.weights, spec.strike,
                                    spec.kind);
        data.instruments.push_back(std::move(inst));
    }
    return data;
}

MarketData generate_lognormal_dataset(const CovarianceModel& model,
                                      double maturity,
                                      const std::vector<BasketSpec>& specs) {
    model.validate();
    if (!(maturity > 0.0)) {
        throw std::invalid_argument("maturity must be positive");
    }
    MarketData data;
    data.n = static_cast<int>(model.forwards.size());
    data.maturity = maturity;
    data.forwards = model.forwards;
    data.instruments.reserve(specs.size());
    for (const auto& spec : specs) {
        Basket basket;
        basket.weights = spec.weights;
        basket.maturity = maturity;
        basket.strike = spec.at_the_money
                            ? spec.weights.dot(model.forwards)
                            : spec.strike;
        Instrument inst;
        inst.weights = spec.weights;
        inst.strike = basket.strike;
        inst.kind = PayoffKind::Call;
        inst.price = basket_call_price(basket, model);
        data.instruments.push_back(std::move(inst));
    }
    return data;
}

// ---------------------------------------------------------------------------
// Monte Carlo oracle
// ---------------------------------------------------------------------------

McEstimate monte_carlo_basket_price(const CovarianceModel& model,
                                    double maturity,
                                    const Eigen::VectorXd& weights,
                                    double strike, long samples,
                                    std::uint64_t seed) {
    if (weights.size() != model.forwards.size()) {
        throw std::invalid_argument(
            "weights do not match the model dimension");
    }
    if (samples < 1000) {
        throw std::invalid_argument("Monte Carlo requires samples >= 1000");
    }
    if (!(maturity > 0.0)) {
        throw std::invalid_argument("maturity must be positive");
    }
    const Eigen::Index n = model.forwards.size();
    Eigen::MatrixXd total_cov =
        0.5 * (model.covariance + model.covariance.transpose()) * maturity;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(total_cov);
    const double scale = std::max(1.0, total_cov.cwiseAbs().maxCoeff());
    if (es.eigenvalues().minCoeff() < -1e-8 * scale) {
        throw std::invalid_argument(
            "covariance is not positive semidefinite");
    }
    const Eigen::VectorXd clipped =
        es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd loadings =
        es.eigenvectors() * clipped.asDiagonal();
    // The martingale drift uses the variance actually realized after
    // clipping, so E[x_i] = F_i holds exactly for the sampled law.
    Eigen::VectorXd drift(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        drift[i] = -0.5 * loadings.row(i).squaredNorm();
    }

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd z(n), x(n);

    // Welford accumulation keeps the zero-variance case exact.
    double mean = 0.0;
    double m2 = 0.0;
    for (long s = 0; s < samples; ++s) {
        for (Eigen::Index i = 0; i < n; ++i) {
            z[i] = gauss(rng);
        }
        x = model.forwards.array() *
            (loadings * z + drift).array().exp();
        const double value = std::max(weights.dot(x) - strike, 0.0);
        const double delta = value - mean;
        mean += delta / static_cast<double>(s + 1);
        m2 += delta * (value - mean);
    }
    McEstimate out;
    out.estimate = mean;
    const double variance =
        std::max(m2, 0.0) / static_cast<double>(samples - 1);
    out.std_error = std::sqrt(variance / static_cast<double>(samples));
    return out;
}

// ---------------------------------------------------------------------------
// JSON I/O
// ---------------------------------------------------------------------------

namespace {

double require_number(const ordered_json& j, const std::string& path) {
    if (!j.is_number()) {
        throw std::runtime_error(path + ": expected a number");
    }
    return j.get<double>();
}

Eigen::VectorXd require_number_array(const ordered_json& j,
                                     const std::string& path) {
    if (!j.is_array()) {
        throw std::runtime_error(path + ": expected an array of numbers");
    }
    Eigen::VectorXd out(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] =
            require_number(j[i], path + "[" + std::to_string(i) + "]");
    }
    return out;
}

const ordered_json& require_field(const ordered_json& j,
                                  const std::string& key,
                                  const std::string& path) {
    if (!j.is_object()) {
        throw std::runtime_error(path + ": expected an object");
    }
    const auto it = j.find(key);
    if (it == j.end()) {
        throw std::runtime_error(path + "." + key + ": missing field");
    }
    return *it;
}

}  // namespace

MarketData load_market_data(const std::string& path,
                            std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("could not open " + path);
    }
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }

    MarketData data;
    const auto& jn = require_field(j, "n", "$");
    if (!jn.is_number_integer() || jn.get<long>() < 1) {
        throw std::runtime_error("$.n: expected a positive integer");
    }
    data.n = jn.get<int>();
    data.maturity = require_number(require_field(j, "maturity", "$"),
                                   "$.maturity");
    data.forwards = require_number_array(require_field(j, "forwards", "$"),
                                         "$.forwards");
    if (data.forwards.size() != data.n) {
        throw std::runtime_error("$.forwards: expected " +
                                 std::to_string(data.n) + " entries");
    }

    const auto& insts = require_field(j, "instruments", "$");
    if (!insts.is_array()) {
        throw std::runtime_error("$.instruments: expected an array");
    }
    for (std::size_t i = 0; i < insts.size(); ++i) {
        const std::string base = "$.instruments[" + std::to_string(i) + "]";
        const auto& ji = insts[i];
        Instrument inst;
        inst.weights =
            require_number_array(require_field(ji, "weights", base),
                                 base + ".weights");
        if (inst.weights.size() != data.n) {
            throw std::runtime_error(base + ".weights: expected " +
                                     std::to_string(data.n) + " entries");
        }
        inst.strike = require_number(require_field(ji, "strike", base),
                                     base + ".strike");
        const auto& jk = require_field(ji, "kind", base);
        if (!jk.is_string()) {
            throw std::runtime_error(base + ".kind: expected a string");
        }
        try {
            inst.kind = payoff_kind_from_string(jk.get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(base + ".kind: " + e.what());
        }
        inst.price = require_number(require_field(ji, "price", base),
                                    base + ".price");
        data.instruments.push_back(std::move(inst));
    }

    std::vector<std::string> found;
    try {
        found = data.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    if (warnings != nullptr) {
        warnings->insert(warnings->end(), found.begin(), found.end());
    }
    return data;
}

void save_market_data(const std::string& path, const MarketData& data) {
    data.validate();
    ordered_json j;
    j["n"] = data.n;
    j["maturity"] = data.maturity;
    j["forwards"] = std::vector<double>(
        data.forwards.data(), data.forwards.data() + data.forwards.size());
    j["instruments"] = ordered_json::array();
    for (const auto& inst : data.instruments) {
        ordered_json ji;
        ji["weights"] = std::vector<double>(
            inst.weights.data(), inst.weights.data() + inst.weights.size());
        ji["strike"] = inst.strike;
        ji["kind"] = to_string(inst.kind);
        ji["price"] = inst.price;
        j["instruments"].push_back(std::move(ji));
    }
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("could not open " + path + " for writing");
    }
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Results CSV
// ---------------------------------------------------------------------------

std::string format_results_csv(const std::vector<ResultRow>& rows) {
    std::string out =
        "strike,outer_lower,inner_lower,model_lower,model_upper,"
        "inner_upper,outer_upper,status\n";
    const auto cell = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    for (const auto& row : rows) {
        out += format_double(row.strike);
        out += ',';
        out += cell(row.outer_lower);
        out += ',';
        out += cell(row.inner_lower);
        out += ',';
        out += cell(row.model_lower);
        out += ',';
        out += cell(row.model_upper);
        out += ',';
        out += cell(row.inner_upper);
        out += ',';
        out += cell(row.outer_upper);
        out += ',';
        out += row.status;
        out += '\n';
    }
    return out;
}

void save_results(const std::string& path,
                  const std::vector<ResultRow>& rows) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("could not open " + path + " for writing");
    }
    out << format_results_csv(rows);
}

}  // namespace arbbounds
