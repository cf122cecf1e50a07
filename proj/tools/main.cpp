// Command-line surface: pricing, implied variance, bound computations over
// strike sweeps, and one-command reproduction of the reference tables.
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "arbbounds/market_model.hpp"
#include "arbbounds/model_bounds.hpp"
#include "arbbounds/moment_bounds.hpp"
#include "arbbounds/pricing.hpp"
#include "arbbounds/static_bounds.hpp"
#include "json.hpp"

using namespace arbbounds;

namespace {

// ---------------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------------

Eigen::VectorXd parse_weights(const std::string& text) {
    std::vector<double> values;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string item =
            text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        char* end = nullptr;
        const double v = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0' || !std::isfinite(v)) {
            throw CLI::ValidationError(
                "--target-weights",
                "expected comma-separated numbers, got '" + text + "'");
        }
        values.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    Eigen::VectorXd w(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        w[static_cast<Eigen::Index>(i)] = values[i];
    }
    return w;
}

// Inclusive arithmetic strike grid from "start:stop:step".  The arithmetic
// runs in extended precision so decimal grids land on the nearest doubles
// (0:2:0.05 yields 0.7, not 0.7000000000000001).
std::vector<double> parse_sweep(const std::string& spec) {
    long double start = 0.0L, stop = 0.0L, step = 0.0L;
    int consumed = 0;
    const int got = std::sscanf(spec.c_str(), "%Lf:%Lf:%Lf%n", &start, &stop,
                                &step, &consumed);
    if (got != 3 || consumed != static_cast<int>(spec.size()) ||
        !(step > 0.0L) || !(start <= stop)) {
        throw CLI::ValidationError(
            "--sweep", "expected start:stop:step with step > 0 and start <= "
                       "stop, got '" +
                           spec + "'");
    }
    const long count =
        static_cast<long>(std::floor((stop - start) / step + 1e-9L));
    std::vector<double> strikes;
    strikes.reserve(static_cast<std::size_t>(count) + 1);
    for (long i = 0; i <= count; ++i) {
        strikes.push_back(
            static_cast<double>(start + static_cast<long double>(i) * step));
    }
    return strikes;
}

// ARB_BOUNDS_TOL overrides the solver tolerance of every solve the command
// runs; the fallback is the library default of the method in question.
double env_tolerance_or(double fallback) {
    const char* text = std::getenv("ARB_BOUNDS_TOL");
    if (text == nullptr || *text == '\0') return fallback;
    char* end = nullptr;
    const double v = std::strtod(text, &end);
    if (end == text || *end != '\0' || !(v > 0.0) || !std::isfinite(v)) {
        throw std::runtime_error(
            "ARB_BOUNDS_TOL must be a positive number, got '" +
            std::string(text) + "'");
    }
    return v;
}

// Keeps solver messages CSV-safe inside the status column.
std::string sanitize_status(std::string text) {
    for (char& c : text) {
        if (c == ',') c = ';';
        if (c == '\n') c = ' ';
    }
    return text;
}

std::string print_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Minimal lognormal model file: {"forwards": [...], "covariance": [[...]]}.
CovarianceModel load_covariance_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("could not open " + path);
    }
    const nlohmann::json j = nlohmann::json::parse(in);
    CovarianceModel model;
    const auto& jf = j.at("forwards");
    model.forwards.resize(static_cast<Eigen::Index>(jf.size()));
    for (std::size_t i = 0; i < jf.size(); ++i) {
        model.forwards[static_cast<Eigen::Index>(i)] = jf.at(i).get<double>();
    }
    const auto& jc = j.at("covariance");
    const Eigen::Index n = model.forwards.size();
    model.covariance.resize(n, n);
    if (static_cast<Eigen::Index>(jc.size()) != n) {
        throw std::runtime_error(path + ": covariance must be " +
                                 std::to_string(n) + " rows");
    }
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& row = jc.at(static_cast<std::size_t>(r));
        if (static_cast<Eigen::Index>(row.size()) != n) {
            throw std::runtime_error(path + ": covariance rows must have " +
                                     std::to_string(n) + " entries");
        }
        for (Eigen::Index c = 0; c < n; ++c) {
            model.covariance(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    model.validate();
    return model;
}

// ---------------------------------------------------------------------------
// Concurrent sweep runner
// ---------------------------------------------------------------------------

void for_each_index(int count, const std::function<void(int)>& work) {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers =
        std::min<unsigned>(hw, static_cast<unsigned>(std::max(count, 0)));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                work(i);
            }
        });
    }
    for (std::thread& th : pool) th.join();
}

struct SweepOutcome {
    std::vector<ResultRow> rows;
    bool all_ok = true;
};

// Rows keep the sweep order regardless of which worker computes them; a
// throwing fill marks its row as an error and the run continues.
SweepOutcome run_sweep(const std::vector<double>& strikes,
                       const std::function<bool(ResultRow&, double)>& fill) {
    SweepOutcome out;
    out.rows.resize(strikes.size());
    std::atomic<bool> all_ok{true};
    for_each_index(static_cast<int>(strikes.size()), [&](int i) {
        ResultRow& row = out.rows[static_cast<std::size_t>(i)];
        row.strike = strikes[static_cast<std::size_t>(i)];
        try {
            if (!fill(row, row.strike)) all_ok = false;
        } catch (const std::exception& e) {
            row.status = sanitize_status(std::string("error: ") + e.what());
            all_ok = false;
        }
    });
    out.all_ok = all_ok;
    return out;
}

// ---------------------------------------------------------------------------
// Row fillers
// ---------------------------------------------------------------------------

void append_status(std::string& status, const char* side, const std::string& what) {
    if (!status.empty()) status += ';';
    status += side;
    status += '=';
    status += what;
}

bool fill_static(ResultRow& row, const MarketData& data, const Basket& target,
                 const SolverOptions& solver) {
    const OuterBoundsResult r = outer_bounds(data, target, solver);
    std::string status;
    if (r.lower_status == SolveStatus::Optimal) {
        row.outer_lower = r.lower;
    } else {
        append_status(status, "lower", to_string(r.lower_status));
    }
    if (r.upper_status == SolveStatus::Optimal) {
        row.outer_upper = r.upper;
    } else {
        append_status(status, "upper", to_string(r.upper_status));
    }
    if (status.empty()) return true;
    row.status = sanitize_status(status);
    return false;
}

bool fill_inner(ResultRow& row, const MarketData& data, const Basket& target,
                const GridSpec& grid, const SolverOptions& solver) {
    const InnerBoundsResult r = inner_bounds(data, target, grid, solver);
    std::string status;
    if (r.lower_status == SolveStatus::Optimal) {
        row.inner_lower = r.lower;
    } else {
        append_status(status, "lower", to_string(r.lower_status));
    }
    if (r.upper_status == SolveStatus::Optimal) {
        row.inner_upper = r.upper;
    } else {
        append_status(status, "upper", to_string(r.upper_status));
    }
    if (status.empty()) return true;
    row.status = sanitize_status(status);
    return false;
}

// The Unbounded upper cap at the basket forward is a documented outcome of
// the covariance feasibility problem, not a failure.
bool fill_model(ResultRow& row, const MarketData& data, const Basket& target,
                const SolverOptions& solver) {
    const ModelBoundsResult r = model_price_bounds(data, target, solver);
    std::string status;
    bool ok = true;
    if (r.lower_status == SolveStatus::Optimal) {
        row.model_lower = r.price_lower;
    } else {
        append_status(status, "lower", to_string(r.lower_status));
        ok = false;
    }
    if (r.upper_status == SolveStatus::Optimal) {
        row.model_upper = r.price_upper;
    } else if (r.upper_status == SolveStatus::Unbounded) {
        row.model_upper = r.price_upper;
        append_status(status, "upper", "Unbounded(capped at forward)");
    } else {
        append_status(status, "upper", to_string(r.upper_status));
        ok = false;
    }
    if (!status.empty()) row.status = sanitize_status(status);
    return ok;
}

// Moment bounds are outer bounds on the straddle |w'x - K| and land in the
// outer columns.
bool fill_moment(ResultRow& row, const MarketData& data, const Basket& target,
                 const MomentOptions& options) {
    const MomentBoundsResult r = moment_bound(data, target, options);
    std::string status;
    if (r.lower_status == SolveStatus::Optimal) {
        row.outer_lower = r.lower;
    } else {
        append_status(status, "lower", to_string(r.lower_status));
    }
    if (r.upper_status == SolveStatus::Optimal) {
        row.outer_upper = r.upper;
    } else {
        append_status(status, "upper", to_string(r.upper_status));
    }
    if (status.empty()) return true;
    row.status = sanitize_status(status);
    return false;
}

// ---------------------------------------------------------------------------
// Reference datasets
// ---------------------------------------------------------------------------

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

// Two-asset discrete reference: six atoms on the unit box quoted through
// seven basket calls; the (1,1) index call at strike 1 prices at 0.24.
MarketData six_atom_call_market() {
    DiscreteMeasure m;
    m.atoms = {vec({0.0, 0.0}), vec({0.0, 0.8}), vec({0.8, 0.3}),
               vec({0.6, 0.6}), vec({0.1, 0.4}), vec({1.0, 1.0})};
    m.probabilities = vec({0.2, 0.2, 0.2, 0.1, 0.1, 0.2});
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
    return generate_discrete_dataset(m, specs);
}

// Five-asset lognormal reference: equicorrelated covariance, at-the-money
// single-asset calls plus three at-the-money basket calls.
CovarianceModel five_asset_model() {
    CovarianceModel model;
    model.forwards = vec({0.03, 0.03, 0.05, 0.07, 0.07});
    model.covariance = Eigen::MatrixXd::Constant(5, 5, 0.04);
    model.covariance.diagonal().array() += 0.02;
    return model;
}

MarketData five_asset_call_market() {
    std::vector<BasketSpec> specs;
    for (int i = 0; i < 5; ++i) {
        BasketSpec s;
        s.weights = Eigen::VectorXd::Zero(5);
        s.weights(i) = 1.0;
        s.at_the_money = true;
        specs.push_back(s);
    }
    const double basket_rows[3][5] = {{0.33, 0.33, 0.33, 0.00, 0.00},
                                      {0.00, 0.00, 0.33, 0.33, 0.33},
                                      {0.40, 0.20, 0.20, 0.20, 0.00}};
    for (const double* r : basket_rows) {
        BasketSpec s;
        s.weights = vec({r[0], r[1], r[2], r[3], r[4]});
        s.at_the_money = true;
        specs.push_back(s);
    }
    return generate_lognormal_dataset(five_asset_model(), 1.0, specs);
}

// Two-asset discrete reference quoted through five straddles; the sum
// straddle at strike 3 prices at 1.2.
MarketData five_straddle_market() {
    DiscreteMeasure m;
    m.atoms = {vec({0.0, 0.0}), vec({0.0, 3.0}), vec({3.0, 0.0}),
               vec({1.0, 2.0}), vec({5.0, 4.0})};
    m.probabilities = vec({0.2, 0.2, 0.2, 0.3, 0.1});
    std::vector<InstrumentSpec> specs;
    auto add = [&](std::initializer_list<double> w, double strike) {
        InstrumentSpec s;
        s.weights = vec(w);
        s.strike = strike;
        s.kind = PayoffKind::Straddle;
        specs.push_back(s);
    };
    add({1.0, 0.0}, 0.9);
    add({1.0, 0.0}, 1.0);
    add({0.0, 1.0}, 1.9);
    add({0.0, 1.0}, 2.0);
    add({0.0, 1.0}, 2.1);
    return generate_discrete_dataset(m, specs);
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct PriceArgs {
    double forward = 0.0;
    double strike = 0.0;
    double variance = 0.0;
    double maturity = 1.0;
    std::string model_file;
    std::string weights;
};

int cmd_price(const PriceArgs& a) {
    double price = 0.0;
    if (!a.model_file.empty()) {
        if (a.weights.empty()) {
            throw std::runtime_error("--model-file requires --weights");
        }
        const CovarianceModel model = load_covariance_model(a.model_file);
        Basket basket;
        basket.weights = parse_weights(a.weights);
        basket.strike = a.strike;
        basket.maturity = a.maturity;
        price = basket_call_price(basket, model);
    } else {
        price = bs_call(a.forward, a.strike, a.variance);
    }
    std::cout << print_double(price) << "\n";
    return 0;
}

struct ImpliedArgs {
    double price = 0.0;
    double forward = 0.0;
    double strike = 0.0;
};

int cmd_implied(const ImpliedArgs& a) {
    std::cout << print_double(implied_variance(a.price, a.forward, a.strike))
              << "\n";
    return 0;
}

struct BoundsArgs {
    std::string method;  // static | inner | model | moment
    std::string data_file;
    std::string weights;
    std::optional<double> strike;
    std::string sweep;
    int grid = 10;
    int degree = 1;
    double box = 0.0;  // 0: method default
    bool identities = false;
    std::string out;
};

int cmd_bounds(const BoundsArgs& a) {
    const MarketData data = load_market_data(a.data_file);
    Basket target;
    target.weights = parse_weights(a.weights);
    target.maturity = data.maturity;
    if (target.weights.size() != data.n) {
        throw std::runtime_error("--target-weights has " +
                                 std::to_string(target.weights.size()) +
                                 " entries but the dataset has " +
                                 std::to_string(data.n) + " assets");
    }
    std::vector<double> strikes;
    if (a.strike.has_value()) {
        strikes.push_back(*a.strike);
    } else {
        strikes = parse_sweep(a.sweep);
    }

    SolverOptions solver;
    solver.tolerance = env_tolerance_or(solver.tolerance);
    std::function<bool(ResultRow&, double)> fill;
    if (a.method == "static") {
        fill = [&](ResultRow& row, double k) {
            Basket t = target;
            t.strike = k;
            return fill_static(row, data, t, solver);
        };
    } else if (a.method == "inner") {
        const double box = a.box > 0.0 ? a.box : 1.0;
        const GridSpec grid = GridSpec::cube(data.n, 0.0, box, a.grid);
        fill = [&, grid](ResultRow& row, double k) {
            Basket t = target;
            t.strike = k;
            return fill_inner(row, data, t, grid, solver);
        };
    } else if (a.method == "model") {
        fill = [&](ResultRow& row, double k) {
            Basket t = target;
            t.strike = k;
            return fill_model(row, data, t, solver);
        };
    } else {
        MomentOptions options;
        options.order = a.degree;
        options.straddle_square_identities = a.identities;
        if (a.box > 0.0) {
            options.box_lower = Eigen::VectorXd::Zero(data.n);
            options.box_upper = Eigen::VectorXd::Constant(data.n, a.box);
        }
        options.solver.tolerance = env_tolerance_or(options.solver.tolerance);
        fill = [&, options](ResultRow& row, double k) {
            Basket t = target;
            t.strike = k;
            return fill_moment(row, data, t, options);
        };
    }

    const SweepOutcome outcome = run_sweep(strikes, fill);
    if (a.out.empty()) {
        std::cout << format_results_csv(outcome.rows);
    } else {
        save_results(a.out, outcome.rows);
        std::cout << "wrote " << a.out << "\n";
    }
    return outcome.all_ok ? 0 : 1;
}

struct ReproduceArgs {
    std::string figure;
    std::string out_dir = ".";
};

int cmd_reproduce(const ReproduceArgs& a) {
    const std::string base = a.out_dir + "/" + a.figure;
    SolverOptions solver;
    solver.tolerance = env_tolerance_or(solver.tolerance);
    SweepOutcome outcome;
    MarketData data;

    if (a.figure == "fig1") {
        data = six_atom_call_market();
        const GridSpec grid = GridSpec::cube(2, 0.0, 1.0, 10);
        const Basket index{vec({1.0, 1.0}), 0.0, data.maturity};
        outcome = run_sweep(parse_sweep("0:2:0.05"), [&](ResultRow& row, double k) {
            Basket t = index;
            t.strike = k;
            const bool outer_ok = fill_static(row, data, t, solver);
            const bool inner_ok = fill_inner(row, data, t, grid, solver);
            return outer_ok && inner_ok;
        });
    } else if (a.figure == "fig2") {
        // Bounds at strike 1 using only the first k quotes, k = 2..7; the
        // first column holds k instead of a strike.
        data = six_atom_call_market();
        const GridSpec grid = GridSpec::cube(2, 0.0, 1.0, 10);
        const Basket index{vec({1.0, 1.0}), 1.0, data.maturity};
        std::vector<double> counts;
        for (int k = 2; k <= 7; ++k) counts.push_back(k);
        outcome = run_sweep(counts, [&](ResultRow& row, double count) {
            MarketData subset = data;
            subset.instruments.resize(static_cast<std::size_t>(count));
            const bool outer_ok = fill_static(row, subset, index, solver);
            const bool inner_ok = fill_inner(row, subset, index, grid, solver);
            return outer_ok && inner_ok;
        });
    } else if (a.figure == "fig3") {
        data = five_asset_call_market();
        const Basket index{Eigen::VectorXd::Constant(5, 0.2), 0.0,
                           data.maturity};
        const double atm = index.weights.dot(data.forwards);
        std::vector<double> strikes;
        for (int i = 0; i <= 20; ++i) {
            strikes.push_back(atm * (0.5 + 0.05 * static_cast<double>(i)));
        }
        outcome = run_sweep(strikes, [&](ResultRow& row, double k) {
            Basket t = index;
            t.strike = k;
            const bool model_ok = fill_model(row, data, t, solver);
            const bool outer_ok = fill_static(row, data, t, solver);
            return model_ok && outer_ok;
        });
    } else if (a.figure == "fig4") {
        // The plain degree-1 relaxation prices every straddle to the same
        // interval, so the table is produced with the square identities on;
        // solver failures at some strikes are expected and land in the
        // status column.
        data = five_straddle_market();
        MomentOptions options;
        options.straddle_square_identities = true;
        options.box_lower = Eigen::VectorXd::Zero(2);
        options.box_upper = Eigen::VectorXd::Constant(2, 10.0);
        options.solver.tolerance = env_tolerance_or(options.solver.tolerance);
        const Basket sum{vec({1.0, 1.0}), 0.0, data.maturity};
        outcome = run_sweep(parse_sweep("0:6:0.25"), [&](ResultRow& row, double k) {
            Basket t = sum;
            t.strike = k;
            return fill_moment(row, data, t, options);
        });
    } else {
        throw std::runtime_error("unknown figure '" + a.figure +
                                 "' (expected fig1, fig2, fig3 or fig4)");
    }

    save_market_data(base + ".json", data);
    save_results(base + ".csv", outcome.rows);
    std::cout << "wrote " << base << ".json\n";
    std::cout << "wrote " << base << ".csv\n";
    return outcome.all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Price bounds on basket options from quoted forwards and options.\n"
        "ARB_BOUNDS_TOL overrides the solver tolerance of every solve."};
    app.require_subcommand(1);

    PriceArgs price_args;
    CLI::App* price = app.add_subcommand(
        "price", "Basket call price under the lognormal approximation");
    price->add_option("--forward", price_args.forward, "Forward of the basket");
    price->add_option("--strike", price_args.strike, "Strike")->required();
    price->add_option("--variance", price_args.variance,
                      "Total variance sigma^2 T");
    price->add_option("--model-file", price_args.model_file,
                      "JSON file {\"forwards\": [..], \"covariance\": [[..]]}");
    price->add_option("--weights", price_args.weights,
                      "Comma-separated basket weights (with --model-file)");
    price->add_option("--maturity", price_args.maturity,
                      "Maturity in years (with --model-file)");

    ImpliedArgs implied_args;
    CLI::App* implied = app.add_subcommand(
        "implied", "Total variance implied by a call quote");
    implied->add_option("--price", implied_args.price, "Call price")->required();
    implied->add_option("--forward", implied_args.forward, "Forward")->required();
    implied->add_option("--strike", implied_args.strike, "Strike")->required();

    BoundsArgs bounds_args;
    CLI::App* bounds = app.add_subcommand(
        "bounds", "Price bounds over one strike or a sweep, as CSV");
    bounds->require_subcommand(1);
    const auto add_bounds_common = [&](CLI::App* sub) {
        sub->add_option("--data", bounds_args.data_file, "Market data JSON file")
            ->required();
        sub->add_option("--target-weights", bounds_args.weights,
                        "Comma-separated target basket weights")
            ->required();
        sub->add_option("--strike", bounds_args.strike, "Single strike");
        sub->add_option("--sweep", bounds_args.sweep,
                        "Strike grid start:stop:step (inclusive)");
        sub->add_option("--out", bounds_args.out,
                        "Write CSV here instead of stdout");
    };
    CLI::App* bounds_static = bounds->add_subcommand(
        "static", "Buy-and-hold bounds on a basket call (outer columns)");
    add_bounds_common(bounds_static);
    CLI::App* bounds_inner = bounds->add_subcommand(
        "inner", "Grid-measure bounds on a basket call (inner columns)");
    add_bounds_common(bounds_inner);
    bounds_inner->add_option("--grid", bounds_args.grid,
                             "Bins per asset (atoms are (bins+1)^n)");
    bounds_inner->add_option("--box", bounds_args.box,
                             "Upper edge of the per-asset box [0, B]");
    CLI::App* bounds_model = bounds->add_subcommand(
        "model", "Lognormal-model bounds on a basket call (model columns)");
    add_bounds_common(bounds_model);
    CLI::App* bounds_moment = bounds->add_subcommand(
        "moment",
        "Moment relaxation bounds on the straddle |w'x - K| (outer columns)");
    add_bounds_common(bounds_moment);
    bounds_moment->add_option("--degree", bounds_args.degree,
                              "Relaxation order N");
    bounds_moment->add_option("--box", bounds_args.box,
                              "Upper edge of the support box [0, B]");
    bounds_moment->add_flag("--identities", bounds_args.identities,
                            "Add squared-straddle identities (tightens)");

    ReproduceArgs repro_args;
    CLI::App* repro = app.add_subcommand(
        "reproduce", "Write a reference dataset and its results CSV");
    repro->add_option("figure", repro_args.figure,
                      "fig1 (call sweep), fig2 (quote count), fig3 (lognormal "
                      "vs static), fig4 (straddle moment sweep)")
        ->required();
    repro->add_option("--out-dir", repro_args.out_dir,
                      "Directory for the .json and .csv files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (price->parsed()) return cmd_price(price_args);
        if (implied->parsed()) return cmd_implied(implied_args);
        if (bounds->parsed()) {
            if (!bounds_args.strike.has_value() && bounds_args.sweep.empty()) {
                throw std::runtime_error(
                    "bounds needs --strike or --sweep start:stop:step");
            }
            if (bounds_args.strike.has_value() && !bounds_args.sweep.empty()) {
                throw std::runtime_error("--strike and --sweep are exclusive");
            }
            for (CLI::App* sub :
                 {bounds_static, bounds_inner, bounds_model, bounds_moment}) {
                if (sub->parsed()) bounds_args.method = sub->get_name();
            }
            return cmd_bounds(bounds_args);
        }
        if (repro->parsed()) return cmd_reproduce(repro_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
