#include "arbbounds/moment_bounds.hpp"

#include "arbbounds/linear_program.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace arbbounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kCoordinateTol = 1e-12;   // exact-duplicate payoff match
constexpr double kPriceConflictTol = 1e-9;
constexpr double kDefaultBoxUpper = 10.0;

std::string instrument_label(std::size_t index) {
    return "instruments[" + std::to_string(index) + "]";
}

// Exact for every size in play: the running product after step i is the
// binomial C(n - k + i, i), so the division never truncates.
long long binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    long long result = 1;
    for (int i = 1; i <= k; ++i) {
        result = result * (n - k + i) / i;
    }
    return result;
}

// Number of monomials in `generators` symbols up to total degree `degree`.
long long count_monomials(int generators, int degree) {
    return binomial(generators + degree, degree);
}

// Rank of an exponent within its total-degree block: the number of
// same-degree exponents sorting earlier (larger leading entries first).
// At position k, every earlier tuple spends more than exponent(k) there and
// distributes the rest freely; the hockey-stick identity collapses the
// count over the spent amount into one binomial.
long long graded_lex_rank(const Eigen::VectorXi& exponent) {
    const int g = static_cast<int>(exponent.size());
    int remaining = exponent.sum();
    long long rank = 0;
    for (int k = 0; k + 1 < g && remaining > 0; ++k) {
        if (exponent(k) < remaining) {
            rank += binomial(remaining - exponent(k) - 1 + g - k - 1, g - k - 1);
        }
        remaining -= exponent(k);
    }
    return rank;
}

// Sup of one generator over the box.  An affine basket w'x ranges over an
// interval whose ends accumulate componentwise, and |. - K| peaks at an
// interval end; coordinates peak at the upper face.
double generator_sup(const PayoffGenerators& generators, int symbol,
                     const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
    if (symbol >= 1 && symbol <= generators.assets) {
        return hi(symbol - 1);
    }
    Eigen::VectorXd w;
    double strike = 0.0;
    if (symbol == 0) {
        w = generators.target_weights;
        strike = generators.target_strike;
    } else {
        const int j = symbol - generators.assets - 1;
        w = generators.quote_weights.row(j).transpose();
        strike = generators.quote_strikes(j);
    }
    double low = 0.0;
    double high = 0.0;
    for (int i = 0; i < generators.assets; ++i) {
        low += std::min(w(i) * lo(i), w(i) * hi(i));
        high += std::max(w(i) * lo(i), w(i) * hi(i));
    }
    return std::max(std::abs(low - strike), std::abs(high - strike));
}

void validate_box(int assets, const Eigen::VectorXd& lo,
                  const Eigen::VectorXd& hi) {
    if (lo.size() != assets || hi.size() != assets) {
        throw std::invalid_argument("support box dimension mismatch");
    }
    if (!lo.allFinite() || !hi.allFinite()) {
        throw std::invalid_argument("support box must be finite");
    }
    for (int i = 0; i < assets; ++i) {
        if (lo(i) < 0.0 || hi(i) < lo(i)) {
            throw std::invalid_argument(
                "support box must satisfy 0 <= lower <= upper componentwise");
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

int PayoffGenerators::count() const {
    return assets + 1 + static_cast<int>(quote_weights.rows());
}

double PayoffGenerators::evaluate(int symbol, const Eigen::VectorXd& x) const {
    if (x.size() != assets) {
        throw std::invalid_argument("evaluation point dimension mismatch");
    }
    if (symbol < 0 || symbol >= count()) {
        throw std::invalid_argument("generator symbol out of range");
    }
    if (symbol == 0) {
        return std::abs(target_weights.dot(x) - target_strike);
    }
    if (symbol <= assets) {
        return x(symbol - 1);
    }
    const int j = symbol - assets - 1;
    return std::abs(quote_weights.row(j).dot(x) - quote_strikes(j));
}

double PayoffGenerators::evaluate_monomial(const Eigen::VectorXi& exponent,
                                           const Eigen::VectorXd& x) const {
    if (exponent.size() != count()) {
        throw std::invalid_argument("exponent size does not match the generator count");
    }
    double product = 1.0;
    for (int k = 0; k < count(); ++k) {
        if (exponent(k) == 0) continue;
        const double value = evaluate(k, x);
        for (int t = 0; t < exponent(k); ++t) product *= value;
    }
    return product;
}

// ---------------------------------------------------------------------------
// Monomial basis
// ---------------------------------------------------------------------------

int MomentBasis::index_of(const Eigen::VectorXi& exponent) const {
    if (static_cast<int>(exponent.size()) != generator_count) {
        throw std::invalid_argument("exponent size does not match the generator count");
    }
    int total = 0;
    for (int k = 0; k < generator_count; ++k) {
        if (exponent(k) < 0) {
            throw std::invalid_argument("exponents must be nonnegative");
        }
        total += exponent(k);
    }
    if (total > degree) {
        throw std::out_of_range("monomial degree " + std::to_string(total) +
                                " exceeds the basis degree " +
                                std::to_string(degree));
    }
    const long long offset =
        total == 0 ? 0 : count_monomials(generator_count, total - 1);
    return static_cast<int>(offset + graded_lex_rank(exponent));
}

MomentBasis enumerate_monomials(int generator_count, int degree) {
    if (generator_count < 1) {
        throw std::invalid_argument("generator count must be positive");
    }
    if (degree < 0) {
        throw std::invalid_argument("degree must be nonnegative");
    }
    MomentBasis basis;
    basis.generator_count = generator_count;
    basis.degree = degree;
    basis.exponents.reserve(
        static_cast<std::size_t>(count_monomials(generator_count, degree)));
    Eigen::VectorXi current = Eigen::VectorXi::Zero(generator_count);
    std::function<void(int, int)> fill = [&](int pos, int remaining) {
        if (pos == generator_count - 1) {
            current(pos) = remaining;
            basis.exponents.push_back(current);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            current(pos) = v;
            fill(pos + 1, remaining - v);
        }
    };
    for (int total = 0; total <= degree; ++total) fill(0, total);
    return basis;
}

// ---------------------------------------------------------------------------
// Moment and localizing matrices
// ---------------------------------------------------------------------------

MomentVector moments_of(const DiscreteMeasure& measure,
                        const PayoffGenerators& generators, int degree) {
    measure.validate();
    const int g = generators.count();
    MomentVector y;
    y.basis = enumerate_monomials(g, degree);
    y.values = Eigen::VectorXd::Zero(y.basis.size());
    Eigen::VectorXd symbol_values(g);
    for (std::size_t a = 0; a < measure.atoms.size(); ++a) {
        for (int k = 0; k < g; ++k) {
            symbol_values(k) = generators.evaluate(k, measure.atoms[a]);
        }
        for (int i = 0; i < y.basis.size(); ++i) {
            const Eigen::VectorXi& e = y.basis.exponents[i];
            double product = 1.0;
            for (int k = 0; k < g; ++k) {
                for (int t = 0; t < e(k); ++t) product *= symbol_values(k);
            }
            y.values(i) += measure.probabilities(a) * product;
        }
    }
    return y;
}

Eigen::MatrixXd moment_matrix(const MomentVector& y, int order) {
    if (order < 0) {
        throw std::invalid_argument("order must be nonnegative");
    }
    if (y.values.size() != y.basis.size()) {
        throw std::invalid_argument("moment vector does not match its basis");
    }
    if (2 * order > y.basis.degree) {
        throw std::invalid_argument(
            "moment vector of degree " + std::to_string(y.basis.degree) +
            " cannot form an order-" + std::to_string(order) + " matrix");
    }
    const int side =
        static_cast<int>(count_monomials(y.basis.generator_count, order));
    Eigen::MatrixXd M(side, side);
    for (int i = 0; i < side; ++i) {
        for (int j = i; j < side; ++j) {
            const double value = y.values(
                y.basis.index_of(y.basis.exponents[i] + y.basis.exponents[j]));
            M(i, j) = value;
            M(j, i) = value;
        }
    }
    return M;
}

Eigen::MatrixXd localizing_matrix(const MomentVector& y,
                                  const std::vector<MonomialTerm>& weight,
                                  int order) {
    if (order < 0) {
        throw std::invalid_argument("order must be nonnegative");
    }
    if (y.values.size() != y.basis.size()) {
        throw std::invalid_argument("moment vector does not match its basis");
    }
    int weight_degree = 0;
    for (const MonomialTerm& term : weight) {
        if (static_cast<int>(term.exponent.size()) != y.basis.generator_count) {
            throw std::invalid_argument(
                "weight exponent size does not match the generator count");
        }
        if ((term.exponent.array() < 0).any()) {
            throw std::invalid_argument("weight exponents must be nonnegative");
        }
        if (!std::isfinite(term.coefficient)) {
            throw std::invalid_argument("weight coefficients must be finite");
        }
        weight_degree = std::max(weight_degree, term.exponent.sum());
    }
    if (2 * order + weight_degree > y.basis.degree) {
        throw std::invalid_argument(
            "weight of degree " + std::to_string(weight_degree) +
            " overflows a degree-" + std::to_string(y.basis.degree) +
            " moment vector at order " + std::to_string(order));
    }
    const int side =
        static_cast<int>(count_monomials(y.basis.generator_count, order));
    Eigen::MatrixXd M(side, side);
    for (int i = 0; i < side; ++i) {
        for (int j = i; j < side; ++j) {
            double value = 0.0;
            for (const MonomialTerm& term : weight) {
                value += term.coefficient *
                         y.values(y.basis.index_of(y.basis.exponents[i] +
                                                   y.basis.exponents[j] +
                                                   term.exponent));
            }
            M(i, j) = value;
            M(j, i) = value;
        }
    }
    return M;
}

double beta_bound(const PayoffGenerators& generators,
                  const Eigen::VectorXd& box_lower,
                  const Eigen::VectorXd& box_upper) {
    validate_box(generators.assets, box_lower, box_upper);
    double beta = 0.0;
    for (int k = 0; k < generators.count(); ++k) {
        beta += generator_sup(generators, k, box_lower, box_upper);
    }
    return beta;
}

std::vector<MonomialTerm> beta_polynomial(int generator_count, double beta) {
    std::vector<MonomialTerm> terms;
    terms.push_back({Eigen::VectorXi::Zero(generator_count), beta});
    for (int k = 0; k < generator_count; ++k) {
        Eigen::VectorXi e = Eigen::VectorXi::Zero(generator_count);
        e(k) = 1;
        terms.push_back({e, -1.0});
    }
    return terms;
}

// ---------------------------------------------------------------------------
// Market conversion
// ---------------------------------------------------------------------------

StraddleMarket build_straddle_market(const MarketData& data,
                                     const Basket& target) {
    data.validate();
    const int n = data.n;
    if (target.weights.size() != n) {
        throw std::invalid_argument("target weight dimension mismatch");
    }
    if (!target.weights.allFinite() || !std::isfinite(target.strike)) {
        throw std::invalid_argument("target weights and strike must be finite");
    }
    const double maturity_scale =
        std::max({1.0, std::abs(target.maturity), std::abs(data.maturity)});
    if (std::abs(target.maturity - data.maturity) > 1e-12 * maturity_scale) {
        throw std::invalid_argument(
            "target maturity does not match the quoted maturity");
    }

    StraddleMarket market;
    market.generators.assets = n;
    market.generators.target_weights = target.weights;
    market.generators.target_strike = target.strike;

    const auto same_payoff = [](const Eigen::VectorXd& w1, double k1,
                                const Eigen::VectorXd& w2, double k2) {
        return (w1 - w2).cwiseAbs().maxCoeff() <= kCoordinateTol &&
               std::abs(k1 - k2) <= kCoordinateTol;
    };
    const auto conflicting = [](double a, double b) {
        return std::abs(a - b) >
               kPriceConflictTol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
    };

    std::vector<Eigen::VectorXd> weights;
    std::vector<double> strikes;
    std::vector<double> prices;
    for (std::size_t i = 0; i < data.instruments.size(); ++i) {
        const Instrument& inst = data.instruments[i];
        const double basket_forward = inst.weights.dot(data.forwards);
        if (inst.kind == PayoffKind::Forward) {
            const double implied = basket_forward - inst.strike;
            if (conflicting(inst.price, implied)) {
                throw std::invalid_argument(
                    instrument_label(i) +
                    ": forward quote conflicts with the forward vector");
            }
            continue;  // content already carried by the asset pins
        }
        double straddle = inst.price;
        if (inst.kind == PayoffKind::Call) {
            straddle = straddle_price_from_call(inst.price, basket_forward,
                                                inst.strike);
        }
        bool merged = false;
        for (std::size_t q = 0; q < weights.size(); ++q) {
            if (!same_payoff(weights[q], strikes[q], inst.weights, inst.strike)) {
                continue;
            }
            if (conflicting(prices[q], straddle)) {
                throw std::invalid_argument(
                    instrument_label(i) +
                    ": quotes the same payoff at a conflicting price");
            }
            merged = true;
            break;
        }
        if (merged) continue;
        if (same_payoff(target.weights, target.strike, inst.weights,
                        inst.strike)) {
            if (market.target_price && conflicting(*market.target_price, straddle)) {
                throw std::invalid_argument(
                    instrument_label(i) +
                    ": quotes the same payoff at a conflicting price");
            }
            market.target_price = straddle;
            continue;
        }
        weights.push_back(inst.weights);
        strikes.push_back(inst.strike);
        prices.push_back(straddle);
    }

    const int m = static_cast<int>(weights.size());
    market.generators.quote_weights.resize(m, n);
    market.generators.quote_strikes.resize(m);
    market.pinned_prices.resize(n + m);
    market.pinned_prices.head(n) = data.forwards;
    for (int j = 0; j < m; ++j) {
        market.generators.quote_weights.row(j) = weights[j].transpose();
        market.generators.quote_strikes(j) = strikes[j];
        market.pinned_prices(n + j) = prices[j];
    }
    return market;
}

// ---------------------------------------------------------------------------
// Relaxation assembly
// ---------------------------------------------------------------------------

namespace {

// Affine payoff |w'x - K| rewritten in box-rescaled coordinates; empty
// weights mark a plain coordinate symbol, which nothing rewrites.
struct ScaledStraddle {
    Eigen::VectorXd weights;
    double strike = 0.0;
};

using Expansion = std::vector<std::pair<int, double>>;

// Rewrites every monomial whose straddle exponents reach 2 through the
// pointwise identity |w'x - K|^2 = (w'x - K)^2, expanded over the
// coordinate symbols, until all straddle exponents are at most one.  Each
// step trades two straddle powers for coordinate powers of the same total
// degree, so the rewriting terminates and never leaves the basis.
struct SquareReducer {
    const MomentBasis& basis;
    int assets;
    const std::vector<ScaledStraddle>& payoff;  // per symbol
    std::vector<Expansion> memo;
    std::vector<char> done;

    SquareReducer(const MomentBasis& basis_, int assets_,
                  const std::vector<ScaledStraddle>& payoff_)
        : basis(basis_), assets(assets_), payoff(payoff_),
          memo(basis_.exponents.size()), done(basis_.exponents.size(), 0) {}

    const Expansion& reduce(int index) {
        if (done[index]) return memo[index];
        const Eigen::VectorXi& e = basis.exponents[index];
        int symbol = -1;
        for (int k = 0; k < static_cast<int>(payoff.size()); ++k) {
            if (payoff[k].weights.size() > 0 && e(k) >= 2) {
                symbol = k;
                break;
            }
        }
        if (symbol < 0) {
            memo[index] = {{index, 1.0}};
            done[index] = 1;
            return memo[index];
        }
        Eigen::VectorXi base = e;
        base(symbol) -= 2;
        std::map<int, double> combination;
        const auto add = [&](const Eigen::VectorXi& exponent, double coeff) {
            for (const auto& [kept, value] : reduce(basis.index_of(exponent))) {
                combination[kept] += coeff * value;
            }
        };
        const ScaledStraddle& p = payoff[symbol];
        for (int a = 0; a < assets; ++a) {
            if (p.weights(a) == 0.0) continue;
            for (int b = 0; b < assets; ++b) {
                if (p.weights(b) == 0.0) continue;
                Eigen::VectorXi exponent = base;
                exponent(1 + a) += 1;
                exponent(1 + b) += 1;
                add(exponent, p.weights(a) * p.weights(b));
            }
            if (p.strike != 0.0) {
                Eigen::VectorXi exponent = base;
                exponent(1 + a) += 1;
                add(exponent, -2.0 * p.strike * p.weights(a));
            }
        }
        if (p.strike != 0.0) add(base, p.strike * p.strike);
        memo[index] = Expansion(combination.begin(), combination.end());
        done[index] = 1;
        return memo[index];
    }
};

// Everything the two directed solves share.  The conic problem is the dual
// form: free moment entries are the dual variables y, each PSD constraint
// block is a dual slack, pinned entries fold into the objective matrices,
// and the right-hand side picks out the target moment.
struct MomentAssembly {
    MomentBasis basis;            // degree 2N + 1
    Eigen::VectorXd scale;        // per symbol, sup over the box (or 1)
    Eigen::VectorXd pin;          // per basis index, NaN where free
    std::vector<Expansion> expansion;
    std::vector<int> free_of_full;  // -1: pinned or rewritten away
    std::vector<int> full_of_free;
    int objective_full = 1;       // basis index of the target moment
    double beta = 0.0;
    ConicProblem problem;         // rhs filled per solve
};

MomentAssembly build_assembly(const StraddleMarket& market,
                              const MomentOptions& options) {
    const PayoffGenerators& gen = market.generators;
    const int n = gen.assets;
    const int g = gen.count();
    const int quote_count = g - n - 1;
    if (options.order < 1) {
        throw std::invalid_argument("relaxation order must be at least 1");
    }

    Eigen::VectorXd lo = options.box_lower.size() > 0
                             ? options.box_lower
                             : Eigen::VectorXd::Zero(n);
    Eigen::VectorXd hi = options.box_upper.size() > 0
                             ? options.box_upper
                             : Eigen::VectorXd::Constant(n, kDefaultBoxUpper);
    validate_box(n, lo, hi);

    MomentAssembly assembly;
    assembly.basis = enumerate_monomials(g, 2 * options.order + 1);

    Eigen::VectorXd sup(g);
    for (int k = 0; k < g; ++k) sup(k) = generator_sup(gen, k, lo, hi);
    assembly.scale =
        sup.unaryExpr([](double s) { return s > 0.0 ? s : 1.0; });

    assembly.beta = options.beta > 0.0 ? options.beta : sup.sum();
    if (!(assembly.beta > 0.0)) {
        throw std::invalid_argument(
            "the support box collapses every payoff; beta must be positive");
    }

    // Scaled payoff table: symbol k divided by its sup, coordinates
    // substituted as x_a = scale_a * xhat_a.
    std::vector<ScaledStraddle> payoff(g);
    const auto scale_straddle = [&](const Eigen::VectorXd& w, double strike,
                                    int symbol) {
        ScaledStraddle s;
        s.weights = Eigen::VectorXd(n);
        for (int a = 0; a < n; ++a) {
            s.weights(a) = w(a) * assembly.scale(1 + a) / assembly.scale(symbol);
        }
        s.strike = strike / assembly.scale(symbol);
        return s;
    };
    payoff[0] = scale_straddle(gen.target_weights, gen.target_strike, 0);
    for (int j = 0; j < quote_count; ++j) {
        payoff[n + 1 + j] = scale_straddle(gen.quote_weights.row(j).transpose(),
                                           gen.quote_strikes(j), n + 1 + j);
    }

    const int total = assembly.basis.size();
    assembly.expansion.resize(total);
    std::vector<char> kept(total, 1);
    if (options.straddle_square_identities) {
        SquareReducer reducer(assembly.basis, n, payoff);
        for (int f = 0; f < total; ++f) {
            assembly.expansion[f] = reducer.reduce(f);
            kept[f] = assembly.expansion[f].size() == 1 &&
                      assembly.expansion[f][0].first == f;
        }
    } else {
        for (int f = 0; f < total; ++f) assembly.expansion[f] = {{f, 1.0}};
    }

    // Degree-one pins in rescaled units; the constant monomial is pinned to
    // one.  Symbol k sits at basis index 1 + k.
    assembly.pin = Eigen::VectorXd::Constant(total, kNaN);
    assembly.pin(0) = 1.0;
    for (int k = 1; k < g; ++k) {
        assembly.pin(1 + k) = market.pinned_prices(k - 1) / assembly.scale(k);
    }
    if (market.target_price) {
        assembly.pin(1) = *market.target_price / assembly.scale(0);
    }

    assembly.free_of_full.assign(total, -1);
    for (int f = 0; f < total; ++f) {
        if (!kept[f] || !std::isnan(assembly.pin(f))) continue;
        assembly.free_of_full[f] = static_cast<int>(assembly.full_of_free.size());
        assembly.full_of_free.push_back(f);
    }

    // Constraint blocks as polynomial weights in the scaled symbols: the
    // moment matrix, one localizer per generator (or per coordinate), and
    // the support-box polynomial beta - sum_k scale_k * ehat_k.
    std::vector<std::vector<MonomialTerm>> block_weights;
    block_weights.push_back({{Eigen::VectorXi::Zero(g), 1.0}});
    const int localizer_lo = options.localize_all_generators ? 0 : 1;
    const int localizer_hi = options.localize_all_generators ? g : n + 1;
    for (int k = localizer_lo; k < localizer_hi; ++k) {
        Eigen::VectorXi e = Eigen::VectorXi::Zero(g);
        e(k) = 1;
        block_weights.push_back({{e, 1.0}});
    }
    // Normalized to a unit constant term so the conic data stays O(1); the
    // block is a positive multiple of the raw box constraint.
    std::vector<MonomialTerm> box_terms;
    box_terms.push_back({Eigen::VectorXi::Zero(g), 1.0});
    for (int k = 0; k < g; ++k) {
        Eigen::VectorXi e = Eigen::VectorXi::Zero(g);
        e(k) = 1;
        box_terms.push_back({e, -assembly.scale(k) / assembly.beta});
    }
    block_weights.push_back(std::move(box_terms));

    const int side = static_cast<int>(count_monomials(g, options.order));
    assembly.problem.cone.nonneg = 0;
    assembly.problem.cone.psd.assign(block_weights.size(), side);
    assembly.problem.rows.resize(assembly.full_of_free.size());

    for (int b = 0; b < static_cast<int>(block_weights.size()); ++b) {
        for (int i = 0; i < side; ++i) {
            for (int j = i; j < side; ++j) {
                std::map<int, double> combo;
                for (const MonomialTerm& term : block_weights[b]) {
                    const int f = assembly.basis.index_of(
                        assembly.basis.exponents[i] + assembly.basis.exponents[j] +
                        term.exponent);
                    for (const auto& [kept_index, value] : assembly.expansion[f]) {
                        combo[kept_index] += term.coefficient * value;
                    }
                }
                double constant = 0.0;
                for (const auto& [f, value] : combo) {
                    if (value == 0.0) continue;
                    if (!std::isnan(assembly.pin(f))) {
                        constant += assembly.pin(f) * value;
                    } else {
                        // Dual slack form: the block equals G0 + sum y_f G_f,
                        // and the solver wants rows with the opposite sign.
                        assembly.problem.rows[assembly.free_of_full[f]].psd.push_back(
                            {b, i, j, -value});
                    }
                }
                if (constant != 0.0) {
                    assembly.problem.objective.psd.push_back({b, i, j, constant});
                }
            }
        }
    }
    assembly.problem.rhs = Eigen::VectorXd::Zero(
        static_cast<Eigen::Index>(assembly.full_of_free.size()));
    return assembly;
}

// Scaled free solution back to a full moment vector in original units.
MomentVector reconstruct_moments(const MomentAssembly& assembly,
                                 const Eigen::VectorXd& scale,
                                 const Eigen::VectorXd& free_values) {
    const int total = assembly.basis.size();
    Eigen::VectorXd scaled = Eigen::VectorXd::Zero(total);
    for (int f = 0; f < total; ++f) {
        if (!std::isnan(assembly.pin(f))) {
            scaled(f) = assembly.pin(f);
        } else if (assembly.free_of_full[f] >= 0) {
            scaled(f) = free_values(assembly.free_of_full[f]);
        }
    }
    for (int f = 0; f < total; ++f) {
        const Expansion& terms = assembly.expansion[f];
        if (terms.size() == 1 && terms[0].first == f) continue;
        double value = 0.0;
        for (const auto& [kept, coeff] : terms) value += coeff * scaled(kept);
        scaled(f) = value;
    }
    MomentVector y;
    y.basis = assembly.basis;
    y.values.resize(total);
    for (int f = 0; f < total; ++f) {
        double factor = 1.0;
        const Eigen::VectorXi& e = assembly.basis.exponents[f];
        for (int k = 0; k < static_cast<int>(scale.size()); ++k) {
            for (int t = 0; t < e(k); ++t) factor *= scale(k);
        }
        y.values(f) = scaled(f) * factor;
    }
    return y;
}

struct DirectedOutcome {
    SolveStatus status = SolveStatus::NumericalFailure;
    double value = kNaN;
    MomentVector moments;
    std::string note;
};

// One directed solve.  The conic primal and our moment program are a dual
// pair, so the solver's infeasibility and unboundedness certificates swap
// meaning on the way back.
DirectedOutcome run_direction(const MomentAssembly& assembly, Sense sense,
                              const SolverOptions& solver) {
    ConicProblem problem = assembly.problem;
    const int objective_row = assembly.free_of_full[assembly.objective_full];
    const double direction = sense == Sense::Maximize ? 1.0 : -1.0;
    if (objective_row >= 0) problem.rhs(objective_row) = direction;

    const double objective_scale = assembly.scale(0);
    const ConicSolution solution = solve_conic(problem, solver);

    DirectedOutcome out;
    switch (solution.status) {
        case SolveStatus::Optimal: {
            out.status = SolveStatus::Optimal;
            const double scaled = objective_row >= 0
                                      ? direction * solution.dual_objective
                                      : assembly.pin(assembly.objective_full);
            out.value = scaled * objective_scale;
            out.moments = reconstruct_moments(assembly, assembly.scale, solution.y);
            break;
        }
        case SolveStatus::Infeasible: {
            // Dual improving ray: the pins and support box fail to bound
            // the target moment on this side.
            out.status = SolveStatus::Unbounded;
            out.value = sense == Sense::Maximize ? kInf : -kInf;
            out.note = "the relaxation does not bound the target moment (" +
                       solution.message + ")";
            break;
        }
        case SolveStatus::Unbounded: {
            // Primal ray: Farkas certificate against the moment system.
            out.status = SolveStatus::Infeasible;
            out.value = kNaN;
            out.note =
                "no moment vector of this order reproduces the pinned "
                "prices; the quotes admit arbitrage at this relaxation "
                "level (" +
                solution.message + ")";
            break;
        }
        case SolveStatus::NumericalFailure: {
            out.status = SolveStatus::NumericalFailure;
            const double scaled = objective_row >= 0
                                      ? direction * solution.dual_objective
                                      : assembly.pin(assembly.objective_full);
            out.value = scaled * objective_scale;  // last iterate, diagnostic
            out.note = solution.message;
            break;
        }
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

MomentBoundsResult moment_bound(const MarketData& data, const Basket& target,
                                const MomentOptions& options) {
    const StraddleMarket market = build_straddle_market(data, target);
    const MomentAssembly assembly = build_assembly(market, options);

    DirectedOutcome lower = run_direction(assembly, Sense::Minimize, options.solver);
    DirectedOutcome upper;
    if (assembly.free_of_full[assembly.objective_full] < 0) {
        upper = lower;  // pinned objective: one feasibility solve settles both
    } else {
        upper = run_direction(assembly, Sense::Maximize, options.solver);
    }

    MomentBoundsResult result;
    result.lower = lower.value;
    result.upper = upper.value;
    result.lower_status = lower.status;
    result.upper_status = upper.status;
    result.lower_moments = std::move(lower.moments);
    result.upper_moments = std::move(upper.moments);
    result.beta = assembly.beta;

    std::string message;
    const auto append = [&message](const std::string& piece) {
        if (piece.empty()) return;
        if (!message.empty()) message += "; ";
        message += piece;
    };
    if (options.order >= 2) {
        append(
            "order >= 2 relaxations are numerically delicate; "
            "NumericalFailure is an expected outcome");
    }
    if (lower.status != SolveStatus::Optimal) {
        append(std::string("lower solve ") + to_string(lower.status) + ": " +
               lower.note);
    }
    if (upper.status != SolveStatus::Optimal) {
        append(std::string("upper solve ") + to_string(upper.status) + ": " +
               upper.note);
    }
    result.message = message;
    return result;
}

}  // namespace arbbounds
