#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mimetic/checks.hpp"
#include "mimetic/io.hpp"

#include <cmath>
#include <random>
#include <sstream>

using namespace mimetic;

namespace {

double max_abs(const GridFunction& u) { return u.values().cwiseAbs().maxCoeff(); }

double f_square(const Vector& u) { return u[0] * u[0]; }
Vector g_square(const Vector& u) { return Vector::Constant(1, 2.0 * u[0]); }
double f_cube(const Vector& u) { return u[0] * u[0] * u[0]; }
Vector g_cube(const Vector& u) { return Vector::Constant(1, 3.0 * u[0] * u[0]); }
double f_prod(const Vector& u) { return u[0] * u[1]; }
Vector g_prod(const Vector& u) {
    Vector g(2);
    g << u[1], u[0];
    return g;
}

} // namespace

TEST_CASE("product rule is exact for the second-order periodic operator") {
    const Grid g = uniform_grid(0.0, 1.0, 32, Topology::periodic);
    const DiffOp d = central_periodic(g, 2);
    const DiffOp a = averaging_A(g);
    std::mt19937_64 rng(1234);
    for (int t = 0; t < 20; ++t) {
        const GridFunction u = random_grid_function(g, 1, rng);
        const GridFunction v = random_grid_function(g, 1, rng);
        const double scale = max_abs(apply(d, u * v)) + 1.0;
        CHECK(max_abs(product_rule_residual(d, a, u, v)) < 1e-13 * scale);
    }
}

TEST_CASE("product rule is exact for the sbp operator and the 2-node lobatto operator") {
    const Grid gb = uniform_grid(0.0, 1.0, 16, Topology::bounded);
    const DiffOp sbp = sbp_first_order2(gb);
    const DiffOp ab = averaging_A(gb);
    const DiffOp l2 = collocation_lobatto(2);
    // matching averaging operator on the 2-node grid
    const DiffOp a2(l2.grid(), {{{0, 0.5}, {1, 0.5}}, {{0, 0.5}, {1, 0.5}}}, 1,
                    DiffOp::Kind::averaging);
    std::mt19937_64 rng(99);
    for (int t = 0; t < 20; ++t) {
        const GridFunction u = random_grid_function(gb, 1, rng);
        const GridFunction v = random_grid_function(gb, 1, rng);
        CHECK(max_abs(product_rule_residual(sbp, ab, u, v)) < 1e-12);
        const GridFunction u2 = random_grid_function(l2.grid(), 1, rng);
        const GridFunction v2 = random_grid_function(l2.grid(), 1, rng);
        CHECK(max_abs(product_rule_residual(l2, a2, u2, v2)) < 1e-13);
    }
}

TEST_CASE("product rule residual vanishes for constant u") {
    const Grid g = uniform_grid(0.0, 1.0, 16, Topology::periodic);
    const DiffOp d = central_periodic(g, 4);
    const DiffOp a = averaging_A(g);
    const GridFunction c(g, Matrix::Constant(g.size(), 1, 1.7));
    const GridFunction v = sample([](double x) { return std::sin(2.0 * M_PI * x); }, g);
    CHECK(max_abs(product_rule_residual(d, a, c, v)) < 1e-13);
}

TEST_CASE("product rule residual of the fourth-order operator persists under refinement") {
    // residual dominated by the order-2 averaging mismatch: observed order 2
    std::vector<std::pair<double, double>> h_err;
    for (Index n : {64, 128, 256}) {
        const Grid g = uniform_grid(0.0, 2.0 * M_PI, n, Topology::periodic);
        const DiffOp d = central_periodic(g, 4);
        const DiffOp a = averaging_A(g);
        const GridFunction u = sample([](double x) { return std::sin(x); }, g);
        const GridFunction v = sample([](double x) { return std::cos(x); }, g);
        const GridFunction res = product_rule_residual(d, a, u, v);
        CHECK(max_abs(res) / std::pow(g.spacing(), 4) > 1.0); // not an O(h^4) quantity
        h_err.emplace_back(g.spacing(), max_abs(res));
    }
    const ConvergenceTable table = make_convergence_table(h_err, NormKind::max);
    for (std::size_t k = 1; k < table.rows.size(); ++k)
        CHECK(table.rows[k].order == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("chain rule is exact for supported operators and polynomial f") {
    const Grid gp = uniform_grid(0.0, 1.0, 32, Topology::periodic);
    const Grid gb = uniform_grid(0.0, 1.0, 16, Topology::bounded);
    const std::vector<DiffOp> ops = {central_periodic(gp, 2), sbp_first_order2(gb),
                                     collocation_lobatto(2)};
    std::mt19937_64 rng(7);
    for (const DiffOp& d : ops) {
        for (int t = 0; t < 10; ++t) {
            const GridFunction u = random_grid_function(d.grid(), 1, rng);
            CHECK(max_abs(chain_rule_residual(d, f_square, g_square, u)) < 1e-12);
            CHECK(max_abs(chain_rule_residual(d, f_cube, g_cube, u)) < 1e-12);
            const GridFunction w = random_grid_function(d.grid(), 2, rng);
            CHECK(max_abs(chain_rule_residual(d, f_prod, g_prod, w)) < 1e-12);
        }
    }
}

TEST_CASE("chain rule residual vanishes identically for linear f") {
    const Grid g = uniform_grid(0.0, 1.0, 16, Topology::periodic);
    const DiffOp d = central_periodic(g, 2);
    std::mt19937_64 rng(3);
    const GridFunction u = random_grid_function(g, 1, rng);
    const auto f = [](const Vector& w) { return 4.0 * w[0] + 1.0; };
    const auto grad = [](const Vector&) { return Vector::Constant(1, 4.0); };
    // residual is pure rounding at the scale of D applied to f(u)
    CHECK(max_abs(chain_rule_residual(d, f, grad, u)) < 1e-14 * (max_abs(apply(d, u)) + 1.0));
}

TEST_CASE("chain rule residual with f(u1,u2) = u1 u2 matches the product-rule residual") {
    const Grid g = uniform_grid(0.0, 1.0, 24, Topology::periodic);
    const DiffOp d = central_periodic(g, 2);
    const DiffOp a = averaging_A(g);
    std::mt19937_64 rng(17);
    const GridFunction u = random_grid_function(g, 1, rng);
    const GridFunction v = random_grid_function(g, 1, rng);
    Matrix pair(g.size(), 2);
    pair.col(0) = u.values().col(0);
    pair.col(1) = v.values().col(0);
    const GridFunction w(g, pair);
    const GridFunction chain = chain_rule_residual(d, f_prod, g_prod, w);
    const GridFunction product = product_rule_residual(d, a, u, v);
    CHECK((chain.values() - product.values()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("feasibility recovers the averaging operator for the second-order stencil") {
    const Grid g = uniform_grid(0.0, 1.0, 16, Topology::periodic);
    const FeasibilityReport report = product_rule_feasibility(central_periodic(g, 2), 1);
    CHECK(report.max_residual < 1e-12);
    for (Index i = 0; i < g.size(); ++i) {
        REQUIRE(report.recovered[static_cast<std::size_t>(i)].has_value());
        std::map<Index, double> row;
        for (const auto& e : *report.recovered[static_cast<std::size_t>(i)]) row[e.col] += e.coeff;
        CHECK(row.at(g.wrap(i - 1)) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(row.at(g.wrap(i + 1)) == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(row.at(i) == doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("feasibility recovers the sbp boundary closure (1/2, 1/2)") {
    const Grid g = uniform_grid(0.0, 1.0, 8, Topology::bounded);
    const FeasibilityReport report = product_rule_feasibility(sbp_first_order2(g), 1);
    CHECK(report.max_residual < 1e-12);
    REQUIRE(report.recovered[0].has_value());
    std::map<Index, double> row;
    for (const auto& e : *report.recovered[0]) row[e.col] += e.coeff;
    CHECK(row.at(0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(row.at(1) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("no banded averaging operator fits the fourth-order stencil") {
    for (Index n : {16, 32, 64}) {
        const Grid g = uniform_grid(0.0, 1.0, n, Topology::periodic);
        const DiffOp d = central_periodic(g, 4);
        for (Index b = 1; b <= 4; ++b) {
            const FeasibilityReport report = product_rule_feasibility(d, b);
            CHECK(report.min_residual > 0.01);
        }
    }
}

TEST_CASE("feasibility residual is invariant under refinement") {
    const auto residual_at = [](Index n) {
        const Grid g = uniform_grid(0.0, 1.0, n, Topology::periodic);
        return product_rule_feasibility(central_periodic(g, 4), 2).min_residual;
    };
    CHECK(residual_at(128) == doctest::Approx(residual_at(16)).epsilon(1e-6));
}

TEST_CASE("entropy production of the non-mimetic counterexample is 0.42") {
    const NonmimeticCounterexample report = counterexample_nonmimetic_d2();
    CHECK(report.node_contributions[0] == doctest::Approx(-0.17));
    CHECK(report.node_contributions[1] == doctest::Approx(-0.20));
    CHECK(report.node_contributions[2] == doctest::Approx(0.79));
    CHECK(report.production == doctest::Approx(0.42));
    CHECK(report.positive);
}

TEST_CASE("entropy production vanishes for constant states") {
    const Grid g = uniform_grid(0.0, 1.0, 12, Topology::periodic);
    const DiffOp d2 = d2_periodic_order2(g);
    const GridFunction c(g, Matrix::Constant(g.size(), 1, 0.4));
    CHECK(std::abs(entropy_production(d2, mass_matrix(g), square_entropy(), c)) < 1e-12);
}

TEST_CASE("compatible operator dissipates every built-in convex entropy") {
    std::mt19937_64 rng(2024);
    const std::vector<Entropy> entropies = {square_entropy(), linear_entropy(),
                                            smoothed_hinge_entropy(0.1, 0.05)};
    for (int t = 0; t < 200; ++t) {
        const bool periodic = (t % 2) == 0;
        const Index m = (t % 4 < 2) ? 1 : 2;
        const Grid g = uniform_grid(0.0, 1.0, 16, periodic ? Topology::periodic : Topology::bounded);
        Vector eps(g.size());
        for (Index i = 0; i < g.size(); ++i) eps[i] = uniform_double(rng, 0.0, 2.0);
        if (!periodic) {
            eps[0] = 0.0;
            eps[g.size() - 1] = 0.0;
        }
        const CoefficientField field(eps);
        const DiffOp d2 = d2_varcoef_sbp(g, field);
        const MassMatrix w = mass_matrix(g);
        const GridFunction u = random_grid_function(g, m, rng);
        const Entropy& s = entropies[static_cast<std::size_t>(t) % entropies.size()];
        const double production = entropy_production(d2, w, s, u);
        const double scale = entropy_production_scale(d2, w, s, u);
        CHECK(production <= 1e-14 * scale);
        // telescoped form agrees with the direct sum
        const double telescoped = entropy_production_telescoped(g, field, s, u);
        CHECK(std::abs(production - telescoped) <= 1e-13 * scale);
    }
}

TEST_CASE("entropy builtins pass convexity and monotonicity spot checks") {
    for (const Entropy& s : {square_entropy(), linear_entropy(), hinge_entropy(0.25),
                             smoothed_hinge_entropy(0.25, 0.1)}) {
        CHECK(check_convexity(s, 2, 200, 5));
        CHECK(check_gradient_monotonicity(s, 2, 200, 6));
    }
}

TEST_CASE("entropy label parsing") {
    CHECK(parse_entropy("square").label == "square");
    CHECK(parse_entropy("hinge:0.005").gradient(Vector::Constant(1, 0.01))[0] == 1.0);
    CHECK(parse_entropy("smoothhinge:0.1:0.01").label.rfind("smoothhinge", 0) == 0);
    CHECK_THROWS_AS(parse_entropy("cubic"), std::invalid_argument);
}

TEST_CASE("lobatto counterexample report") {
    const LobattoCounterexample report = counterexample_lobatto();
    CHECK(report.du_at_left == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.dv_at_left == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.duv_at_left == doctest::Approx(-6.0));
    CHECK(report.violation_observed);
}

TEST_CASE("lobatto construction with u = v = x has no product-rule defect") {
    const DiffOp d = collocation_lobatto(3);
    const DiffOp a(d.grid(),
                   {{{0, 0.5}, {1, 0.5}}, {{0, 0.5}, {2, 0.5}}, {{1, 0.5}, {2, 0.5}}}, 1,
                   DiffOp::Kind::averaging);
    const GridFunction x = sample([](double t) { return t; }, d.grid());
    // D(x^2) at -1 is exact (-2) and both split factors are exact as well:
    // residual at the left node need not vanish for arbitrary A, but D(uv)
    // itself matches the true derivative since deg(uv) = 2
    const GridFunction dx2 = apply(d, x * x);
    CHECK(dx2.values()(0, 0) == doctest::Approx(-2.0));
}

TEST_CASE("hinge counterexample production") {
    const HingeCounterexample report = counterexample_hinge_entropy(0.01);
    CHECK(report.predicted == doctest::Approx(-2.5 * 0.01 + 1.0 / 12.0));
    CHECK(report.production == doctest::Approx(report.predicted).epsilon(1e-12));
    CHECK(report.positive);
}

TEST_CASE("hinge counterexample crosses zero at eps = 1/30") {
    const HingeCounterexample report = counterexample_hinge_entropy(1.0 / 30.0);
    CHECK(std::abs(report.production) < 1e-12);
}

TEST_CASE("smoothed hinge reproduces the hinge production for narrow smoothing") {
    const HingeCounterexample sharp = counterexample_hinge_entropy(0.01);
    const HingeCounterexample smooth = counterexample_hinge_entropy(0.01, 1e-5);
    CHECK(std::abs(smooth.production - sharp.production) < 1e-6);
}

TEST_CASE("convergence orders of the central operators on sin") {
    for (int p : {2, 4, 6}) {
        const auto builder = [p](Index n) {
            const Grid g = uniform_grid(0.0, 2.0 * M_PI, n, Topology::periodic);
            return ConvergenceCase{central_periodic(g, p), [](double x) { return std::cos(x); }};
        };
        const ConvergenceTable table =
            convergence_study(builder, [](double x) { return std::sin(x); }, {16, 32, 64, 128});
        for (std::size_t k = 1; k < table.rows.size(); ++k)
            CHECK(table.rows[k].order == doctest::Approx(p).epsilon(0.05));
    }
}

TEST_CASE("sbp operator converges at order 1 globally and order 2 in the interior") {
    const auto builder = [](Index n) {
        const Grid g = uniform_grid(0.0, 1.0, n, Topology::bounded);
        return ConvergenceCase{sbp_first_order2(g), [](double x) { return std::cos(x); }};
    };
    const auto fn = [](double x) { return std::sin(x); };
    const ConvergenceTable global = convergence_study(builder, fn, {16, 32, 64, 128});
    const ConvergenceTable interior =
        convergence_study(builder, fn, {16, 32, 64, 128}, NormKind::max, true);
    CHECK(global.rows.back().order == doctest::Approx(1.0).epsilon(0.1));
    CHECK(interior.rows.back().order == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("chain-rule residual of the second-order operator shows no observable order") {
    for (Index n : {16, 32, 64}) {
        const Grid g = uniform_grid(0.0, 1.0, n, Topology::periodic);
        const DiffOp d = central_periodic(g, 2);
        const GridFunction u = sample([](double x) { return std::sin(2.0 * M_PI * x); }, g);
        CHECK(max_abs(chain_rule_residual(d, f_cube, g_cube, u)) < 1e-12);
    }
}

TEST_CASE("convergence table validates decreasing h and emits csv") {
    CHECK_THROWS_AS(make_convergence_table({{0.1, 1.0}, {0.2, 0.5}}, NormKind::max),
                    std::invalid_argument);
    const ConvergenceTable table = make_convergence_table({{0.2, 0.4}, {0.1, 0.1}}, NormKind::max);
    CHECK(table.rows[1].order == doctest::Approx(2.0));
    std::stringstream buffer;
    write_convergence_csv(buffer, table);
    std::string line;
    std::getline(buffer, line);
    CHECK(line == "h,error,order");
}
