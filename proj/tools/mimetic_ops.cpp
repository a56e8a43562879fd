// Command-line driver: verification suites, counterexamples, convergence
// studies, feasibility analyses and BV checks, emitting JSON (CSV for tables).
//
// Exit codes: 0 all checks within tolerance, 1 a check failed (JSON diagnostic
// still emitted), 2 usage error. Counterexample runs exit 0 when the violation
// is observed, since the violation is the expected result.

#include "mimetic/mimetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

using namespace mimetic;
using json = nlohmann::ordered_json;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::uint64_t default_seed() {
    if (const char* env = std::getenv("MIMETIC_OPS_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw CLI::ValidationError("MIMETIC_OPS_SEED", "not a valid unsigned integer");
        }
    }
    return 42;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary); // binary: keep LF endings
    if (!out) throw std::runtime_error("cannot open output file: " + out_path);
    out << text;
}

bool is_first_derivative(const std::string& op) {
    return op == "central2" || op == "central4" || op == "central6" || op == "sbp2" ||
           op == "lobatto2" || op == "lobatto3";
}

bool is_second_derivative(const std::string& op) {
    return op == "d2-order2" || op == "d2-order4" || op == "d2-varcoef" ||
           op == "d2-nonmimetic";
}

/// First-derivative operator on its natural grid: central stencils on a
/// periodic [0, 2 pi) grid, the SBP operator on bounded [0, 1], Lobatto
/// collocation on its fixed nodes (n is ignored there).
DiffOp build_first_derivative(const std::string& op, Index n) {
    if (op == "central2" || op == "central4" || op == "central6") {
        const int p = op == "central2" ? 2 : op == "central4" ? 4 : 6;
        return central_periodic(uniform_grid(0.0, two_pi, n, Topology::periodic), p);
    }
    if (op == "sbp2") return sbp_first_order2(uniform_grid(0.0, 1.0, n, Topology::bounded));
    if (op == "lobatto2") return collocation_lobatto(2);
    if (op == "lobatto3") return collocation_lobatto(3);
    throw CLI::ValidationError("--op", "not a first-derivative operator: " + op);
}

/// Smooth coefficient used for variable-coefficient convergence studies.
double smooth_eps(double x) { return 2.0 + std::sin(x); }

DiffOp build_second_derivative(const std::string& op, Index n) {
    const Grid grid = uniform_grid(0.0, two_pi, n, Topology::periodic);
    if (op == "d2-order2") return d2_periodic_order2(grid);
    if (op == "d2-order4") return d2_periodic_order4(grid);
    Vector eps(grid.size());
    for (Index i = 0; i < grid.size(); ++i) eps[i] = smooth_eps(grid.node(i));
    if (op == "d2-varcoef") return d2_varcoef_sbp(grid, CoefficientField(eps));
    if (op == "d2-nonmimetic") return d2_varcoef_nonmimetic(grid, CoefficientField(eps));
    throw CLI::ValidationError("--op", "not a second-derivative operator: " + op);
}

/// Matching averaging operator for the exactly-mimetic first derivatives.
DiffOp matching_averaging(const DiffOp& d) {
    if (d.kind() == DiffOp::Kind::collocation && d.size() == 2)
        return DiffOp(d.grid(), {{{0, 0.5}, {1, 0.5}}, {{0, 0.5}, {1, 0.5}}}, 1,
                      DiffOp::Kind::averaging);
    return averaging_A(d.grid());
}

// ---- verify ---------------------------------------------------------------

struct VerifyConfig {
    std::string suite = "product-rule";
    std::string op = "central2";
    std::string entropy = "square";
    Index n = 64;
    int trials = 100;
    std::uint64_t seed = 42;
    double tol = -1.0; // per-suite default when negative
    std::string out, format = "json";
};

int run_verify(const VerifyConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    json report;
    report["subcommand"] = "verify";
    report["suite"] = cfg.suite;
    report["op"] = cfg.op;
    report["n"] = cfg.n;
    report["trials"] = cfg.trials;
    report["seed"] = cfg.seed;
    bool pass = false;

    if (cfg.suite == "product-rule" || cfg.suite == "chain-rule") {
        const double tol = cfg.tol > 0.0 ? cfg.tol : (cfg.suite == "product-rule" ? 1e-13 : 1e-12);
        const DiffOp d = build_first_derivative(cfg.op, cfg.n);
        double worst = 0.0;
        if (cfg.suite == "product-rule") {
            const DiffOp a = matching_averaging(d);
            for (int t = 0; t < cfg.trials; ++t) {
                const GridFunction u = random_grid_function(d.grid(), 1, rng);
                const GridFunction v = random_grid_function(d.grid(), 1, rng);
                const double scale = apply(d, u * v).values().cwiseAbs().maxCoeff() +
                                     apply(d, u).values().cwiseAbs().maxCoeff() *
                                         apply(a, v).values().cwiseAbs().maxCoeff() +
                                     1.0;
                const GridFunction res = product_rule_residual(d, a, u, v);
                worst = std::max(worst, res.values().cwiseAbs().maxCoeff() / scale);
            }
        } else {
            const auto f = [](const Vector& u) { return u[0] * u[0] * u[0]; };
            const auto grad = [](const Vector& u) {
                return Vector::Constant(1, 3.0 * u[0] * u[0]);
            };
            for (int t = 0; t < cfg.trials; ++t) {
                const GridFunction u = random_grid_function(d.grid(), 1, rng);
                const double scale = apply(d, u).values().cwiseAbs().maxCoeff() + 1.0;
                const GridFunction res = chain_rule_residual(d, f, grad, u);
                worst = std::max(worst, res.values().cwiseAbs().maxCoeff() / scale);
            }
            report["f"] = "u^3";
        }
        pass = worst <= tol;
        report["tol"] = tol;
        report["max_relative_residual"] = worst;
    } else if (cfg.suite == "dissipation") {
        const double tol = cfg.tol > 0.0 ? cfg.tol : 1e-14;
        const Entropy entropy = parse_entropy(cfg.entropy);
        const bool nonmimetic = cfg.op == "d2-nonmimetic";
        if (cfg.op != "d2-varcoef" && !nonmimetic)
            throw CLI::ValidationError("--op",
                                       "dissipation suite supports d2-varcoef and d2-nonmimetic");
        double worst_production = -std::numeric_limits<double>::infinity();
        double worst_mismatch = 0.0;
        pass = true;
        for (int t = 0; t < cfg.trials; ++t) {
            const bool periodic = nonmimetic || (t % 2 == 0);
            const Index m = (t / 2 % 2 == 0) ? 1 : 2;
            const Grid g = uniform_grid(0.0, 1.0, cfg.n,
                                        periodic ? Topology::periodic : Topology::bounded);
            Vector eps(g.size());
            for (Index i = 0; i < g.size(); ++i) eps[i] = uniform_double(rng, 0.0, 3.0);
            if (!periodic) {
                eps[0] = 0.0;
                eps[g.size() - 1] = 0.0;
            }
            const CoefficientField field(eps);
            const DiffOp d2 = nonmimetic ? d2_varcoef_nonmimetic(g, field)
                                         : d2_varcoef_sbp(g, field);
            const GridFunction u = random_grid_function(g, m, rng, -2.0, 2.0);
            const MassMatrix w = mass_matrix(g);
            const double production = entropy_production(d2, w, entropy, u);
            const double scale = entropy_production_scale(d2, w, entropy, u);
            pass = pass && production <= tol * scale;
            worst_production = std::max(worst_production, production / scale);
            if (!nonmimetic) {
                const double mismatch =
                    std::abs(production - entropy_production_telescoped(g, field, entropy, u));
                pass = pass && mismatch <= 10.0 * tol * scale;
                worst_mismatch = std::max(worst_mismatch, mismatch / scale);
            }
        }
        report["entropy"] = entropy.label;
        report["tol"] = tol;
        report["max_production_over_scale"] = worst_production;
        if (!nonmimetic) report["max_telescope_mismatch_over_scale"] = worst_mismatch;
    } else {
        throw CLI::ValidationError("--suite",
                                   "must be product-rule, chain-rule or dissipation");
    }

    report["pass"] = pass;
    emit(report.dump(2) + "\n", cfg.out);
    return pass ? 0 : 1;
}

// ---- counterexample -------------------------------------------------------

struct CounterexampleConfig {
    std::string name = "lobatto";
    double eps = 0.01;
    double tol = 1e-12;
    std::string out, format = "json";
};

int run_counterexample(const CounterexampleConfig& cfg) {
    json report;
    report["subcommand"] = "counterexample";
    report["name"] = cfg.name;
    bool observed = false;
    if (cfg.name == "lobatto") {
        const LobattoCounterexample r = counterexample_lobatto();
        report["du_at_left"] = r.du_at_left;
        report["dv_at_left"] = r.dv_at_left;
        report["duv_at_left"] = r.duv_at_left;
        report["target_duv_at_left"] = -6.0;
        observed = r.violation_observed && std::abs(r.duv_at_left + 6.0) <= cfg.tol;
    } else if (cfg.name == "nonmimetic-d2") {
        const NonmimeticCounterexample r = counterexample_nonmimetic_d2();
        report["node_contributions"] = {r.node_contributions[0], r.node_contributions[1],
                                        r.node_contributions[2]};
        report["production"] = r.production;
        report["target_production"] = 0.42;
        observed = r.positive && std::abs(r.production - 0.42) <= cfg.tol;
    } else if (cfg.name == "hinge-entropy") {
        const HingeCounterexample r = counterexample_hinge_entropy(cfg.eps);
        report["eps"] = r.eps;
        report["entropy"] = r.entropy_label;
        report["production"] = r.production;
        report["predicted_production"] = r.predicted;
        observed = r.positive && std::abs(r.production - r.predicted) <= cfg.tol;
    } else {
        throw CLI::ValidationError("--name",
                                   "must be lobatto, nonmimetic-d2 or hinge-entropy");
    }
    report["tol"] = cfg.tol;
    report["violation_observed"] = observed;
    emit(report.dump(2) + "\n", cfg.out);
    return observed ? 0 : 1;
}

// ---- converge -------------------------------------------------------------

struct ConvergeConfig {
    std::string op = "central2";
    std::string test = "sin";
    std::vector<Index> n_list = {16, 32, 64, 128};
    std::string norm = "max";
    bool interior_only = false;
    std::string out, format = "csv";
};

int run_converge(const ConvergeConfig& cfg) {
    if (cfg.test != "sin")
        throw CLI::ValidationError("--test", "only the sin test function is available");
    if (cfg.op == "lobatto2" || cfg.op == "lobatto3")
        throw CLI::ValidationError("--op", "fixed-size collocation operators cannot be refined");
    const NormKind norm = cfg.norm == "l2" ? NormKind::l2 : NormKind::max;
    if (cfg.norm != "max" && cfg.norm != "l2")
        throw CLI::ValidationError("--norm", "must be max or l2");

    std::function<ConvergenceCase(Index)> builder;
    if (is_first_derivative(cfg.op)) {
        builder = [&cfg](Index n) {
            return ConvergenceCase{build_first_derivative(cfg.op, n),
                                   [](double x) { return std::cos(x); }};
        };
    } else if (is_second_derivative(cfg.op)) {
        const bool varcoef = cfg.op == "d2-varcoef" || cfg.op == "d2-nonmimetic";
        // d/dx (eps u')(x) for u = sin: eps' cos - eps sin, with eps = 2 + sin
        // for the variable-coefficient operators and eps = 1 otherwise
        const auto exact = varcoef ? std::function<double(double)>([](double x) {
            return std::cos(x) * std::cos(x) - smooth_eps(x) * std::sin(x);
        })
                                   : std::function<double(double)>(
                                         [](double x) { return -std::sin(x); });
        builder = [&cfg, exact](Index n) {
            return ConvergenceCase{build_second_derivative(cfg.op, n), exact};
        };
    } else {
        throw CLI::ValidationError("--op", "unknown operator: " + cfg.op);
    }

    const ConvergenceTable table =
        convergence_study(builder, [](double x) { return std::sin(x); }, cfg.n_list, norm,
                          cfg.interior_only);
    if (cfg.format == "csv") {
        std::ostringstream os;
        write_convergence_csv(os, table);
        emit(os.str(), cfg.out);
    } else {
        json report;
        report["subcommand"] = "converge";
        report["op"] = cfg.op;
        report["test"] = cfg.test;
        report["norm"] = cfg.norm;
        json rows = json::array();
        for (std::size_t k = 0; k < table.rows.size(); ++k) {
            json row;
            row["h"] = table.rows[k].h;
            row["error"] = table.rows[k].error;
            if (k > 0 && std::isfinite(table.rows[k].order)) row["order"] = table.rows[k].order;
            rows.push_back(row);
        }
        report["rows"] = rows;
        emit(report.dump(2) + "\n", cfg.out);
    }
    return 0;
}

// ---- feasibility ----------------------------------------------------------

struct FeasibilityConfig {
    std::string op = "central4";
    Index n = 32;
    Index bandwidth = 2;
    double tol = 1e-12;
    std::string out, format = "json";
};

int run_feasibility(const FeasibilityConfig& cfg) {
    const DiffOp d = build_first_derivative(cfg.op, cfg.n);
    const FeasibilityReport r = product_rule_feasibility(d, cfg.bandwidth, cfg.tol);
    Index recovered = 0;
    for (const auto& row : r.recovered)
        if (row) ++recovered;
    json report;
    report["subcommand"] = "feasibility";
    report["op"] = cfg.op;
    report["n"] = cfg.n;
    report["bandwidth"] = cfg.bandwidth;
    report["recover_tol"] = cfg.tol;
    report["min_residual"] = r.min_residual;
    report["max_residual"] = r.max_residual;
    report["rows_with_exact_averaging"] = recovered;
    report["exact_product_rule_exists"] = r.max_residual <= cfg.tol;
    emit(report.dump(2) + "\n", cfg.out);
    return 0;
}

// ---- bv-check -------------------------------------------------------------

struct BvConfig {
    int trials = 100;
    std::uint64_t seed = 42;
    double tol = 1e-13;
    std::string out, format = "json";
};

int run_bv_check(const BvConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    const auto make_step = [&rng](int jumps) {
        std::vector<double> bps;
        while (static_cast<int>(bps.size()) < jumps) {
            const double x = uniform_double(rng, 0.05, 0.95);
            bool dup = false;
            for (double y : bps) dup = dup || std::abs(x - y) < 1e-6;
            if (!dup) bps.push_back(x);
        }
        std::sort(bps.begin(), bps.end());
        Matrix plateaus(jumps + 1, 1);
        for (Index r = 0; r < plateaus.rows(); ++r)
            plateaus(r, 0) = uniform_double(rng, -2.0, 2.0);
        return StepFunction(0.0, 1.0, std::move(bps), std::move(plateaus));
    };

    double worst_product = 0.0;
    for (int t = 0; t < cfg.trials; ++t) {
        const StepFunction u = make_step(2 + static_cast<int>(rng() % 5));
        const StepFunction v = make_step(2 + static_cast<int>(rng() % 5));
        worst_product = std::max(worst_product, volpert_product_residual(u, v).max_abs_weight());
    }

    double worst_chain = 0.0;
    for (int deg = 1; deg <= 8; ++deg) {
        Vector coeff(deg + 1);
        for (Index q = 0; q <= deg; ++q) coeff[q] = uniform_double(rng, -1.0, 1.0);
        const auto f = [&coeff, deg](const Vector& u) {
            double acc = 0.0;
            for (int q = 0; q <= deg; ++q) acc += coeff[q] * std::pow(u[0], q);
            return acc;
        };
        const auto grad = [&coeff, deg](const Vector& u) {
            double acc = 0.0;
            for (int q = 1; q <= deg; ++q) acc += q * coeff[q] * std::pow(u[0], q - 1);
            return Vector::Constant(1, acc);
        };
        for (int t = 0; t < 10; ++t) {
            const StepFunction u = make_step(3);
            worst_chain = std::max(worst_chain, volpert_chain_residual(f, grad, u).max_abs_weight());
        }
    }

    const bool pass = worst_product <= cfg.tol && worst_chain <= 10.0 * cfg.tol;
    json report;
    report["subcommand"] = "bv-check";
    report["trials"] = cfg.trials;
    report["seed"] = cfg.seed;
    report["tol"] = cfg.tol;
    report["max_product_residual"] = worst_product;
    report["max_chain_residual"] = worst_chain;
    report["pass"] = pass;
    emit(report.dump(2) + "\n", cfg.out);
    return pass ? 0 : 1;
}

void add_output_flags(CLI::App* cmd, std::string& out, std::string& format,
                      const std::string& default_format) {
    cmd->add_option("--out", out, "output file (stdout when omitted)");
    cmd->add_option("--format", format, "output format")
        ->default_val(default_format)
        ->check(CLI::IsMember({"json", "csv"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mimetic difference operators: verification and counterexample driver"};
    app.require_subcommand(1);

    VerifyConfig verify_cfg;
    CounterexampleConfig cx_cfg;
    ConvergeConfig conv_cfg;
    FeasibilityConfig feas_cfg;
    BvConfig bv_cfg;

    CLI::App* verify = app.add_subcommand("verify", "run an exact-identity or dissipation suite");
    verify->add_option("--suite", verify_cfg.suite, "product-rule, chain-rule or dissipation")
        ->check(CLI::IsMember({"product-rule", "chain-rule", "dissipation"}));
    verify->add_option("--op", verify_cfg.op, "operator name");
    verify->add_option("--entropy", verify_cfg.entropy,
                       "square | linear | hinge:<c> | smoothhinge:<c>:<w>");
    verify->add_option("--n", verify_cfg.n, "grid cells")->check(CLI::PositiveNumber);
    verify->add_option("--trials", verify_cfg.trials, "random trials")->check(CLI::PositiveNumber);
    verify->add_option("--seed", verify_cfg.seed, "RNG seed");
    verify->add_option("--tol", verify_cfg.tol, "tolerance override");
    add_output_flags(verify, verify_cfg.out, verify_cfg.format, "json");

    CLI::App* cx = app.add_subcommand("counterexample", "reproduce a pinned counterexample");
    cx->add_option("--name", cx_cfg.name, "lobatto, nonmimetic-d2 or hinge-entropy")
        ->check(CLI::IsMember({"lobatto", "nonmimetic-d2", "hinge-entropy"}));
    cx->add_option("--eps", cx_cfg.eps, "hinge-entropy data amplitude")->check(CLI::PositiveNumber);
    cx->add_option("--tol", cx_cfg.tol, "match tolerance against the pinned target");
    add_output_flags(cx, cx_cfg.out, cx_cfg.format, "json");

    CLI::App* conv = app.add_subcommand("converge", "grid-refinement error table");
    conv->add_option("--op", conv_cfg.op, "operator name");
    conv->add_option("--test", conv_cfg.test, "test function (sin)");
    conv->add_option("--n", conv_cfg.n_list, "comma-separated grid sizes")->delimiter(',');
    conv->add_option("--norm", conv_cfg.norm, "max or l2");
    conv->add_flag("--interior-only", conv_cfg.interior_only, "exclude boundary nodes from the norm");
    add_output_flags(conv, conv_cfg.out, conv_cfg.format, "csv");

    CLI::App* feas = app.add_subcommand("feasibility",
                                        "least-squares search for an exact averaging operator");
    feas->add_option("--op", feas_cfg.op, "first-derivative operator name");
    feas->add_option("--n", feas_cfg.n, "grid cells")->check(CLI::PositiveNumber);
    feas->add_option("--bandwidth", feas_cfg.bandwidth, "averaging bandwidth")
        ->check(CLI::PositiveNumber);
    feas->add_option("--tol", feas_cfg.tol, "residual threshold for recovering rows");
    add_output_flags(feas, feas_cfg.out, feas_cfg.format, "json");

    CLI::App* bv = app.add_subcommand("bv-check", "step-function product/chain rule residuals");
    bv->add_option("--trials", bv_cfg.trials, "random trials")->check(CLI::PositiveNumber);
    bv->add_option("--seed", bv_cfg.seed, "RNG seed");
    bv->add_option("--tol", bv_cfg.tol, "residual tolerance");
    add_output_flags(bv, bv_cfg.out, bv_cfg.format, "json");

    try {
        verify_cfg.seed = default_seed();
        bv_cfg.seed = default_seed();
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 2;
    }

    try {
        if (verify->parsed()) {
            if (verify_cfg.format != "json")
                throw CLI::ValidationError("--format", "verify emits JSON only");
            return run_verify(verify_cfg);
        }
        if (cx->parsed()) {
            if (cx_cfg.format != "json")
                throw CLI::ValidationError("--format", "counterexample emits JSON only");
            return run_counterexample(cx_cfg);
        }
        if (conv->parsed()) return run_converge(conv_cfg);
        if (feas->parsed()) {
            if (feas_cfg.format != "json")
                throw CLI::ValidationError("--format", "feasibility emits JSON only");
            return run_feasibility(feas_cfg);
        }
        if (bv->parsed()) {
            if (bv_cfg.format != "json")
                throw CLI::ValidationError("--format", "bv-check emits JSON only");
            return run_bv_check(bv_cfg);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
