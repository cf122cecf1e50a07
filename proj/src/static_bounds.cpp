#include "arbbounds/static_bounds.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace arbbounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Coordinates closer than this are the same surface point.
constexpr double kCoordinateTol = 1e-12;
// Same-point quotes whose prices differ by more than this conflict.
constexpr double kPriceConflictTol = 1e-9;

std::string point_label(const PricePoint& point, int source_index) {
    std::ostringstream out;
    switch (point.role) {
        case PricePoint::Role::Forward:
            out << "forwards[" << source_index << "]";
            break;
        case PricePoint::Role::Target:
            out << "target";
            break;
        default:
            out << "instruments[" << source_index << "]";
            break;
    }
    return out.str();
}

bool same_coordinates(const PricePoint& a, const PricePoint& b) {
    if (a.weights.size() != b.weights.size()) return false;
    return (a.weights - b.weights).lpNorm<Eigen::Infinity>() <= kCoordinateTol &&
           std::abs(a.strike - b.strike) <= kCoordinateTol;
}

// The extended coordinate (w, K) of a point as one vector of size n+1.
Eigen::VectorXd extended_coordinate(const PricePoint& point) {
    Eigen::VectorXd z(point.weights.size() + 1);
    z.head(point.weights.size()) = point.weights;
    z(point.weights.size()) = point.strike;
    return z;
}

void check_target(const MarketData& data, const Basket& target) {
    if (target.weights.size() != data.n) {
        throw std::invalid_argument(
            "target weight vector does not match the market dimension");
    }
    if ((target.weights.array() < 0.0).any()) {
        throw std::invalid_argument("target basket has negative weights");
    }
    double scale = std::max(1.0, std::abs(data.maturity));
    if (std::abs(target.maturity - data.maturity) > 1e-12 * scale) {
        throw std::invalid_argument(
            "target maturity differs from the quote maturity; static bounds "
            "compare payoffs at one common maturity");
    }
    if (!(target.strike >= 0.0) || !std::isfinite(target.strike)) {
        throw std::invalid_argument("target strike must be finite and >= 0");
    }
}

// ---------------------------------------------------------------------------
// Subgradient LP assembly
//
// Price points z_i = (w_i, K_i) with prices p_i carry one subgradient
// g_i in R^{n+1} each.  The surface constraints are
//
//   cross:        g_i'(z_j - z_i) <= p_j - p_i   for all ordered pairs i != j
//   homogeneity:  g_i' z_i = p_i
//   signs:        g_i components 1..n >= 0,  -1 <= g_i component n+1 <= 0
//
// With a target at index 0 its price p_0 >= 0 becomes variable 0 and the
// constraints above are rearranged to keep variables on the left.
// Variable layout: [p_0 when present, g_0, g_1, ..., g_M], each g_i
// occupying n+1 consecutive columns.  Inequality rows are emitted in loop
// order over (i, j), i = 0..M outer, j = 0..M inner, j != i; equality rows
// follow in order i = 0..M.  The certificate mapping below relies on this
// ordering.
// ---------------------------------------------------------------------------

struct SurfaceLp {
    LinearProgram lp;
    bool has_target = false;
    int num_points = 0;  // target included when present
    int n = 0;

    int g_col(int point, int comp) const {
        return (has_target ? 1 : 0) + point * (n + 1) + comp;
    }
};

SurfaceLp build_surface_lp(const std::vector<PricePoint>& points, int n,
                           bool has_target) {
    SurfaceLp out;
    out.has_target = has_target;
    out.num_points = static_cast<int>(points.size());
    out.n = n;

    const int pts = out.num_points;
    const int vars = (has_target ? 1 : 0) + pts * (n + 1);
    const int cross_rows = pts * (pts - 1);
    const int eq_rows = pts;

    LinearProgram& lp = out.lp;
    lp.objective = Eigen::VectorXd::Zero(vars);
    lp.lower = Eigen::VectorXd::Constant(vars, -kInf);
    lp.upper = Eigen::VectorXd::Constant(vars, kInf);
    if (has_target) lp.lower(0) = 0.0;
    for (int i = 0; i < pts; ++i) {
        for (int j = 0; j < n; ++j) lp.lower(out.g_col(i, j)) = 0.0;
        lp.lower(out.g_col(i, n)) = -1.0;
        lp.upper(out.g_col(i, n)) = 0.0;
    }

    std::vector<Eigen::VectorXd> coords(pts);
    for (int i = 0; i < pts; ++i) coords[i] = extended_coordinate(points[i]);

    lp.ineq_coeffs = Eigen::MatrixXd::Zero(cross_rows, vars);
    lp.ineq_rhs = Eigen::VectorXd::Zero(cross_rows);
    int row = 0;
    for (int i = 0; i < pts; ++i) {
        for (int j = 0; j < pts; ++j) {
            if (j == i) continue;
            lp.ineq_coeffs.block(row, out.g_col(i, 0), 1, n + 1) =
                (coords[j] - coords[i]).transpose();
            double rhs = 0.0;
            if (has_target && j == 0) {
                lp.ineq_coeffs(row, 0) -= 1.0;  // price of the target moves left
            } else {
                rhs += points[j].price;
            }
            if (has_target && i == 0) {
                lp.ineq_coeffs(row, 0) += 1.0;
            } else {
                rhs -= points[i].price;
            }
            lp.ineq_rhs(row) = rhs;
            ++row;
        }
    }

    lp.eq_coeffs = Eigen::MatrixXd::Zero(eq_rows, vars);
    lp.eq_rhs = Eigen::VectorXd::Zero(eq_rows);
    for (int i = 0; i < pts; ++i) {
        lp.eq_coeffs.block(i, out.g_col(i, 0), 1, n + 1) = coords[i].transpose();
        if (has_target && i == 0) {
            lp.eq_coeffs(i, 0) = -1.0;
        } else {
            lp.eq_rhs(i) = points[i].price;
        }
    }
    return out;
}

Eigen::MatrixXd extract_subgradients(const SurfaceLp& surface,
                                     const Eigen::VectorXd& x) {
    Eigen::MatrixXd g(surface.num_points, surface.n + 1);
    for (int i = 0; i < surface.num_points; ++i) {
        for (int j = 0; j <= surface.n; ++j) g(i, j) = x(surface.g_col(i, j));
    }
    return g;
}

// Net position in each price point implied by the Farkas multipliers: cross
// row (i, j) shorts point i and buys point j, the homogeneity row of point i
// buys point i, and the g_{i,K} >= -1 bound multipliers accumulate cash.
// The aggregated rhs equals positions'prices + cash, which is the (negative)
// setup cost of the candidate portfolio.
ArbitrageCertificate map_certificate(const SurfaceLp& surface,
                                     const std::vector<PricePoint>& points,
                                     const LpFarkas& farkas) {
    ArbitrageCertificate cert;
    cert.points = points;
    cert.farkas = farkas;
    const int pts = surface.num_points;
    cert.positions = Eigen::VectorXd::Zero(pts);

    int row = 0;
    for (int i = 0; i < pts; ++i) {
        for (int j = 0; j < pts; ++j) {
            if (j == i) continue;
            double mu = farkas.ineq(row++);
            cert.positions(j) += mu;
            cert.positions(i) -= mu;
        }
    }
    for (int i = 0; i < pts; ++i) cert.positions(i) += farkas.eq(i);

    cert.cash = 0.0;
    for (int i = 0; i < pts; ++i) cert.cash += farkas.lower(surface.g_col(i, surface.n));

    Eigen::VectorXd prices(pts);
    for (int i = 0; i < pts; ++i) prices(i) = points[i].price;
    cert.cost = cert.positions.dot(prices) + cert.cash;
    return cert;
}

}  // namespace

// ---------------------------------------------------------------------------
// Price points
// ---------------------------------------------------------------------------

GridSpec GridSpec::cube(int n, double lo, double hi, int bins) {
    GridSpec spec;
    spec.box_lower = Eigen::VectorXd::Constant(n, lo);
    spec.box_upper = Eigen::VectorXd::Constant(n, hi);
    spec.bins = bins;
    return spec;
}

std::vector<PricePoint> build_price_points(const MarketData& data) {
    data.validate();  // envelope warnings intentionally ignored here

    std::vector<PricePoint> points;
    std::vector<int> sources;  // instrument index, or -(asset index + 1)
    points.reserve(data.instruments.size() + data.n);

    auto add_point = [&](PricePoint point, int source) {
        for (std::size_t k = 0; k < points.size(); ++k) {
            if (!same_coordinates(points[k], point)) continue;
            double scale = std::max(1.0, std::abs(points[k].price));
            if (std::abs(points[k].price - point.price) > kPriceConflictTol * scale) {
                std::ostringstream msg;
                msg << point_label(points[k], sources[k]) << " and "
                    << point_label(point, source)
                    << " quote the same payoff at conflicting prices ("
                    << points[k].price << " vs " << point.price << ")";
                throw std::invalid_argument(msg.str());
            }
            return;  // exact duplicate, keep the first
        }
        points.push_back(std::move(point));
        sources.push_back(source);
    };

    for (int i = 0; i < data.n; ++i) {
        PricePoint point;
        point.weights = Eigen::VectorXd::Unit(data.n, i);
        point.strike = 0.0;
        point.price = data.forwards(i);
        point.role = PricePoint::Role::Forward;
        add_point(std::move(point), i);
    }

    for (std::size_t i = 0; i < data.instruments.size(); ++i) {
        const Instrument& inst = data.instruments[i];
        PricePoint point;
        point.weights = inst.weights;
        point.strike = inst.strike;
        point.role = PricePoint::Role::Quoted;
        switch (inst.kind) {
            case PayoffKind::Call:
                point.price = inst.price;
                break;
            case PayoffKind::Straddle: {
                // |v-K| = 2(v-K)+ - (v-K) and the forward leg is priced by
                // the quoted forwards, so the call price is exact.
                double basket_forward = inst.weights.dot(data.forwards);
                point.price = call_price_from_straddle(inst.price, basket_forward,
                                                       inst.strike);
                break;
            }
            case PayoffKind::Forward:
                // validate() pinned the coordinates to (e_k, 0); the quote
                // only needs to agree with the forward point already added.
                point.price = inst.price;
                break;
        }
        add_point(std::move(point), static_cast<int>(i));
    }
    return points;
}

// ---------------------------------------------------------------------------
// Outer bounds
// ---------------------------------------------------------------------------

OuterBoundsResult outer_bounds(const MarketData& data, const Basket& target,
                               const SolverOptions& options) {
    check_target(data, target);

    OuterBoundsResult result;
    PricePoint target_point;
    target_point.weights = target.weights;
    target_point.strike = target.strike;
    target_point.price = 0.0;  // variable, not data
    target_point.role = PricePoint::Role::Target;

    result.points = build_price_points(data);
    result.points.insert(result.points.begin(), std::move(target_point));

    SurfaceLp surface = build_surface_lp(result.points, data.n, true);
    surface.lp.objective(0) = 1.0;

    surface.lp.sense = Sense::Minimize;
    LpSolution low = solve_lp(surface.lp, options);
    result.lower_status = low.status;
    result.lower = kNan;
    if (low.status == SolveStatus::Optimal) {
        result.lower = low.objective;
        result.lower_subgradients = extract_subgradients(surface, low.x);
    } else if (low.status == SolveStatus::Infeasible) {
        // The feasible set does not depend on the objective sense: the same
        // certificate rules out the upper solve.
        result.upper_status = SolveStatus::Infeasible;
        result.upper = kNan;
        result.farkas = low.farkas;
        result.message =
            "static arbitrage among the quotes: no consistent call price "
            "surface reproduces them";
        return result;
    } else {
        result.message = "lower bound solve failed: " + low.message;
    }

    surface.lp.sense = Sense::Maximize;
    LpSolution high = solve_lp(surface.lp, options);
    result.upper_status = high.status;
    result.upper = kNan;
    if (high.status == SolveStatus::Optimal) {
        result.upper = high.objective;
        result.upper_subgradients = extract_subgradients(surface, high.x);
    } else if (high.status == SolveStatus::Unbounded) {
        result.upper = kInf;
        if (!result.message.empty()) result.message += "; ";
        result.message += "upper bound is unbounded";
    } else if (!high.message.empty()) {
        if (!result.message.empty()) result.message += "; ";
        result.message += "upper bound solve failed: " + high.message;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Arbitrage check
// ---------------------------------------------------------------------------

StaticArbitrageCheck check_static_arbitrage(const MarketData& data,
                                            const SolverOptions& options) {
    StaticArbitrageCheck result;
    std::vector<PricePoint> points = build_price_points(data);
    if (points.empty()) {
        result.consistent = true;
        result.message = "no quotes to check";
        return result;
    }

    SurfaceLp surface = build_surface_lp(points, data.n, false);
    LpSolution sol = solve_lp(surface.lp, options);

    if (sol.status == SolveStatus::Optimal) {
        result.consistent = true;
        result.message =
            "the quotes admit a consistent call price surface (no static "
            "arbitrage detectable at this relaxation level)";
        return result;
    }
    if (sol.status == SolveStatus::Infeasible) {
        result.consistent = false;
        result.certificate = map_certificate(surface, points, sol.farkas);
        std::ostringstream msg;
        msg << "static arbitrage: candidate buy-and-hold portfolio with setup "
               "cost "
            << result.certificate.cost << " and nonnegative payoff";
        result.message = msg.str();
        return result;
    }
    throw std::runtime_error("arbitrage check did not converge: " + sol.message);
}

// ---------------------------------------------------------------------------
// Inner bounds
// ---------------------------------------------------------------------------

namespace {

std::vector<Eigen::VectorXd> enumerate_atoms(const GridSpec& grid, int n) {
    Eigen::VectorXd lo = grid.box_lower;
    Eigen::VectorXd hi = grid.box_upper;
    if (lo.size() == 0) lo = Eigen::VectorXd::Zero(n);
    if (hi.size() == 0) hi = Eigen::VectorXd::Ones(n);
    if (lo.size() != n || hi.size() != n) {
        throw std::invalid_argument("grid box does not match the market dimension");
    }
    if ((lo.array() < 0.0).any()) {
        throw std::invalid_argument("grid box extends below zero; asset "
                                    "values are nonnegative");
    }
    if (((hi - lo).array() <= 0.0).any()) {
        throw std::invalid_argument("grid box is empty (upper <= lower)");
    }
    if (grid.bins < 1) throw std::invalid_argument("grid needs at least one bin");

    double count = std::pow(static_cast<double>(grid.bins) + 1.0, n);
    if (count > static_cast<double>(grid.atom_cap)) {
        std::ostringstream msg;
        msg << "grid has " << count << " atoms, above the cap of "
            << grid.atom_cap << "; lower the bin count or the dimension";
        throw std::invalid_argument(msg.str());
    }

    long total = static_cast<long>(std::llround(count));
    std::vector<Eigen::VectorXd> atoms;
    atoms.reserve(total);
    std::vector<int> digit(n, 0);
    for (long a = 0; a < total; ++a) {
        Eigen::VectorXd x(n);
        // Multiply before dividing so unit-box atoms are the exact rationals
        // k/bins and payoff kinks on atoms classify exactly.
        for (int d = 0; d < n; ++d) {
            x(d) = lo(d) + (digit[d] * (hi(d) - lo(d))) / grid.bins;
        }
        atoms.push_back(std::move(x));
        for (int d = 0; d < n; ++d) {
            if (++digit[d] <= grid.bins) break;
            digit[d] = 0;
        }
    }
    return atoms;
}

DiscreteMeasure extract_witness(const std::vector<Eigen::VectorXd>& atoms,
                                const Eigen::VectorXd& nu) {
    DiscreteMeasure witness;
    double mass = 0.0;
    for (int a = 0; a < nu.size(); ++a) {
        if (nu(a) > 1e-12) {
            witness.atoms.push_back(atoms[a]);
            mass += nu(a);
        }
    }
    witness.probabilities.resize(static_cast<int>(witness.atoms.size()));
    int k = 0;
    for (int a = 0; a < nu.size(); ++a) {
        if (nu(a) > 1e-12) witness.probabilities(k++) = nu(a) / mass;
    }
    return witness;
}

}  // namespace

InnerBoundsResult inner_bounds(const MarketData& data, const Basket& target,
                               const GridSpec& grid,
                               const SolverOptions& options) {
    check_target(data, target);
    data.validate();

    std::vector<Eigen::VectorXd> atoms = enumerate_atoms(grid, data.n);
    const int num_atoms = static_cast<int>(atoms.size());
    const int num_quotes = static_cast<int>(data.instruments.size());

    LinearProgram lp;
    lp.objective.resize(num_atoms);
    for (int a = 0; a < num_atoms; ++a) {
        lp.objective(a) = payoff(PayoffKind::Call, target.weights.dot(atoms[a]),
                                 target.strike);
    }
    lp.lower = Eigen::VectorXd::Zero(num_atoms);

    // Rows: total mass, one forward per asset, one expectation per quote.
    lp.eq_coeffs = Eigen::MatrixXd::Zero(1 + data.n + num_quotes, num_atoms);
    lp.eq_rhs = Eigen::VectorXd::Zero(1 + data.n + num_quotes);
    lp.eq_coeffs.row(0).setOnes();
    lp.eq_rhs(0) = 1.0;
    for (int a = 0; a < num_atoms; ++a) {
        lp.eq_coeffs.block(1, a, data.n, 1) = atoms[a];
    }
    lp.eq_rhs.segment(1, data.n) = data.forwards;
    for (int q = 0; q < num_quotes; ++q) {
        const Instrument& inst = data.instruments[q];
        for (int a = 0; a < num_atoms; ++a) {
            lp.eq_coeffs(1 + data.n + q, a) =
                payoff(inst.kind, inst.weights.dot(atoms[a]), inst.strike);
        }
        lp.eq_rhs(1 + data.n + q) = inst.price;
    }

    InnerBoundsResult result;
    result.lower = kNan;
    result.upper = kNan;

    lp.sense = Sense::Minimize;
    LpSolution low = solve_lp(lp, options);
    result.lower_status = low.status;
    if (low.status == SolveStatus::Optimal) {
        result.lower = low.objective;
        result.lower_witness = extract_witness(atoms, low.x);
    } else if (low.status == SolveStatus::Infeasible) {
        result.upper_status = SolveStatus::Infeasible;
        result.message =
            "no measure supported on the grid reproduces the forwards and "
            "quotes; refine the grid (more bins) or widen the box";
        return result;
    } else {
        result.message = "lower bound solve failed: " + low.message;
    }

    lp.sense = Sense::Maximize;
    LpSolution high = solve_lp(lp, options);
    result.upper_status = high.status;
    if (high.status == SolveStatus::Optimal) {
        result.upper = high.objective;
        result.upper_witness = extract_witness(atoms, high.x);
    } else if (!high.message.empty()) {
        if (!result.message.empty()) result.message += "; ";
        result.message += "upper bound solve failed: " + high.message;
    }
    return result;
}

}  // namespace arbbounds
