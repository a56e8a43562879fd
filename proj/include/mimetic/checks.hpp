#pragma once

#include "mimetic/diff_ops.hpp"
#include "mimetic/entropy.hpp"
#include "mimetic/second_derivative.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <utility>
#include <vector>

namespace mimetic {

/// Deterministic uniform double in [lo, hi) from the raw generator stream.
inline double uniform_double(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
    const double u01 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u01;
}

inline GridFunction random_grid_function(const Grid& grid, Index m, std::mt19937_64& rng,
                                         double lo = -1.0, double hi = 1.0) {
    Matrix values(grid.size(), m);
    for (Index i = 0; i < grid.size(); ++i)
        for (Index c = 0; c < m; ++c)
            values(i, c) = uniform_double(rng, lo, hi);
    return GridFunction(grid, std::move(values));
}

/// Per-node residual of the discrete product rule
/// D(uv) - (Au)(Dv) - (Du)(Av) for scalar grid functions.
inline GridFunction product_rule_residual(const DiffOp& d, const DiffOp& a,
                                          const GridFunction& u, const GridFunction& v) {
    if (u.components() != 1 || v.components() != 1)
        throw std::invalid_argument("product_rule_residual: scalar grid functions required");
    const GridFunction duv = apply(d, u * v);
    const GridFunction split = apply(a, u) * apply(d, v) + apply(d, u) * apply(a, v);
    return duv - split;
}

/// Per-node residual of the discrete chain rule
/// D f(u) - (A_{f'} u) . (D u), with the segment-averaged gradient A_{f'}.
inline GridFunction chain_rule_residual(const DiffOp& d,
                                        const std::function<double(const Vector&)>& f,
                                        const std::function<Vector(const Vector&)>& f_grad,
                                        const GridFunction& u,
                                        const QuadratureSpec& quad = default_quadrature()) {
    Matrix fu(u.size(), 1);
    for (Index i = 0; i < u.size(); ++i)
        fu(i, 0) = f(u.at(i));
    const GridFunction dfu = apply(d, GridFunction(u.grid(), std::move(fu)));
    // wide operators are accepted here for residual measurement; the exact
    // identity only holds for the 3-point second-order operators
    const GridFunction afp = detail::segment_averaged_gradient(f_grad, u, d, quad, /*strict=*/false);
    const GridFunction du = apply(d, u);
    Matrix res(u.size(), 1);
    for (Index i = 0; i < u.size(); ++i)
        res(i, 0) = dfu.values()(i, 0) - afp.values().row(i).dot(du.values().row(i));
    return GridFunction(u.grid(), std::move(res));
}

/// Per-row outcome of matching an averaging operator to a derivative operator
/// so that the exact bilinear product rule holds.
struct FeasibilityReport {
    /// Relative least-squares residual of the matching system, one per row.
    Vector residuals;
    /// Recovered averaging rows for rows whose residual is below tolerance.
    std::vector<std::optional<DiffOp::Row>> recovered;
    double min_residual = 0.0;
    double max_residual = 0.0;
    Index bandwidth = 0;
};

/// For each row i of D, solve in the least-squares sense for banded averaging
/// coefficients a_{ij} in the coefficient-matching system
/// a_{ij} D_{ik} + D_{ij} a_{ik} = D_{ij} delta_{jk} over all column pairs
/// (j, k). A zero residual means an exact product rule exists for that row.
/// Residuals are reported relative to the right-hand side norm, which makes
/// them invariant under grid refinement.
inline FeasibilityReport product_rule_feasibility(const DiffOp& d, Index bandwidth,
                                                  double recover_tol = 1e-12) {
    if (bandwidth < 1)
        throw std::invalid_argument("product_rule_feasibility: bandwidth must be >= 1");
    const Grid& grid = d.grid();
    const Index n = grid.size();
    FeasibilityReport report;
    report.bandwidth = bandwidth;
    report.residuals.resize(n);
    report.recovered.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        // candidate averaging columns: the band around i
        std::vector<Index> band;
        for (Index off = -bandwidth; off <= bandwidth; ++off) {
            Index j = i + off;
            if (grid.periodic()) j = grid.wrap(j);
            else if (j < 0 || j >= n) continue;
            if (std::find(band.begin(), band.end(), j) == band.end()) band.push_back(j);
        }
        std::sort(band.begin(), band.end());
        // columns where either a or D may be nonzero
        std::vector<Index> cols = band;
        for (const auto& e : d.row(i))
            if (std::find(cols.begin(), cols.end(), e.col) == cols.end()) cols.push_back(e.col);
        std::sort(cols.begin(), cols.end());

        std::map<Index, double> drow;
        for (const auto& e : d.row(i)) drow[e.col] += e.coeff;
        std::map<Index, Index> unknown;
        for (std::size_t k = 0; k < band.size(); ++k) unknown[band[k]] = static_cast<Index>(k);

        const Index n_unknowns = static_cast<Index>(band.size());
        const Index n_eq = static_cast<Index>(cols.size() * cols.size());
        Matrix system = Matrix::Zero(n_eq, n_unknowns);
        Vector rhs = Vector::Zero(n_eq);
        Index eq = 0;
        for (Index j : cols) {
            const auto dj = drow.count(j) ? drow[j] : 0.0;
            for (Index k : cols) {
                const auto dk = drow.count(k) ? drow[k] : 0.0;
                if (unknown.count(j)) system(eq, unknown[j]) += dk;
                if (unknown.count(k)) system(eq, unknown[k]) += dj;
                rhs[eq] = (j == k) ? dj : 0.0;
                ++eq;
            }
        }
        // normal equations with a tiny ridge: rows where D_ii = 0 leave a_ii
        // weakly determined and the ridge picks the minimum-norm solution
        const Matrix gram = system.transpose() * system +
                            1e-14 * Matrix::Identity(n_unknowns, n_unknowns);
        const Vector solution = gram.ldlt().solve(system.transpose() * rhs);
        const double rhs_norm = rhs.norm();
        const double abs_residual = (system * solution - rhs).norm();
        const double residual = rhs_norm > 0.0 ? abs_residual / rhs_norm : abs_residual;
        report.residuals[i] = residual;
        if (residual <= recover_tol) {
            DiffOp::Row row;
            for (Index j : band)
                row.push_back({j, solution[unknown[j]]});
            report.recovered[static_cast<std::size_t>(i)] = std::move(row);
        }
    }
    report.min_residual = report.residuals.minCoeff();
    report.max_residual = report.residuals.maxCoeff();
    return report;
}

/// Discrete entropy production sum_i w_i U'(u_i) . (D2 u)_i.
inline double entropy_production(const DiffOp& d2, const MassMatrix& w, const Entropy& entropy,
                                 const GridFunction& u) {
    if (w.weights.size() != u.size())
        throw std::invalid_argument("entropy_production: weight count mismatch");
    const GridFunction d2u = apply(d2, u);
    double acc = 0.0;
    for (Index i = 0; i < u.size(); ++i)
        acc += w.weights[i] * entropy.gradient(u.at(i)).dot(d2u.at(i).eval());
    return acc;
}

/// Magnitude scale of the entropy-production sum (absolute summands), used to
/// express "production <= tol * scale" tolerances.
inline double entropy_production_scale(const DiffOp& d2, const MassMatrix& w,
                                       const Entropy& entropy, const GridFunction& u) {
    const GridFunction d2u = apply(d2, u);
    double acc = 0.0;
    for (Index i = 0; i < u.size(); ++i)
        acc += w.weights[i] *
               entropy.gradient(u.at(i)).cwiseAbs().dot(d2u.at(i).cwiseAbs().eval());
    return acc + 1.0;
}

/// Telescoped form of the entropy production for the compatible
/// variable-coefficient operator:
/// - sum_i h ((eps_i + eps_{i+1}) / 2) (U'_{i+1} - U'_i) . (u_{i+1} - u_i) / h^2.
/// Matches entropy_production(d2_varcoef_sbp, mass_matrix, ...) exactly.
inline double entropy_production_telescoped(const Grid& grid, const CoefficientField& eps,
                                            const Entropy& entropy, const GridFunction& u) {
    const double h = grid.spacing();
    const Index n = grid.size();
    const Index n_edges = grid.periodic() ? n : n - 1;
    double acc = 0.0;
    for (Index i = 0; i < n_edges; ++i) {
        const Index ip = grid.periodic() ? grid.wrap(i + 1) : i + 1;
        const Vector du = u.at(ip) - u.at(i);
        const Vector dg = entropy.gradient(u.at(ip)) - entropy.gradient(u.at(i));
        acc += 0.5 * (eps[i] + eps[ip]) * dg.dot(du);
    }
    return -acc / h;
}

/// Product-rule counterexample on 3 Lobatto nodes with u = v = (1 + x)^2:
/// both discrete derivatives vanish at x = -1, yet D(uv) there is -6.
struct LobattoCounterexample {
    double du_at_left = 0.0;
    double dv_at_left = 0.0;
    double duv_at_left = 0.0;
    bool violation_observed = false;
};

inline LobattoCounterexample counterexample_lobatto() {
    const DiffOp d = collocation_lobatto(3);
    const GridFunction u = sample([](double x) { return (1.0 + x) * (1.0 + x); }, d.grid());
    const GridFunction duv = apply(d, u * u);
    const GridFunction du = apply(d, u);
    LobattoCounterexample report;
    report.du_at_left = du.values()(0, 0);
    report.dv_at_left = du.values()(0, 0);
    report.duv_at_left = duv.values()(0, 0);
    report.violation_observed = std::abs(report.duv_at_left) > 1e-6 &&
                                std::abs(report.du_at_left) < 1e-12 &&
                                std::abs(report.dv_at_left) < 1e-12;
    return report;
}

/// Entropy counterexample for the fourth-order second derivative: a hinge
/// entropy with threshold eps/2 and the data u_j = eps, u_{j+2} = -1 produce
/// strictly positive entropy production c_0 eps - c_2 = -(5/2) eps + 1/12
/// (with h = 1) for small eps.
struct HingeCounterexample {
    double eps = 0.0;
    double production = 0.0;
    double predicted = 0.0;
    bool positive = false;
    std::string entropy_label;
};

inline HingeCounterexample counterexample_hinge_entropy(double eps = 0.01,
                                                        std::optional<double> smoothing_width = {},
                                                        Index n = 8) {
    if (!(eps > 0.0))
        throw std::invalid_argument("counterexample_hinge_entropy: eps must be positive");
    const Grid grid = uniform_grid(0.0, static_cast<double>(n), n, Topology::periodic);
    const DiffOp d2 = d2_periodic_order4(grid);
    const Index j = 2;
    Matrix values = Matrix::Zero(n, 1);
    values(j, 0) = eps;
    values(grid.wrap(j + 2), 0) = -1.0;
    const GridFunction u(grid, std::move(values));
    const Entropy entropy = smoothing_width ? smoothed_hinge_entropy(0.5 * eps, *smoothing_width)
                                            : hinge_entropy(0.5 * eps);
    HingeCounterexample report;
    report.eps = eps;
    report.production = entropy_production(d2, mass_matrix(grid), entropy, u);
    report.predicted = -2.5 * eps + 1.0 / 12.0;
    report.positive = report.production > 0.0;
    report.entropy_label = entropy.label;
    return report;
}

/// Counterexample: the non-compatible variable-coefficient operator on
/// the 3-node periodic grid produces positive entropy production 0.42 for the
/// linear entropy.
struct NonmimeticCounterexample {
    Vector node_contributions;
    double production = 0.0;
    bool positive = false;
};

inline NonmimeticCounterexample counterexample_nonmimetic_d2() {
    const Grid grid = uniform_grid(0.0, 3.0, 3, Topology::periodic);
    Vector eps(3), uvals(3);
    eps << 0.4, 0.2, 0.8;
    uvals << 0.6, 0.8, 0.2;
    const DiffOp d2 = d2_varcoef_nonmimetic(grid, CoefficientField(eps));
    const GridFunction u(grid, uvals);
    const GridFunction d2u = apply(d2, u);
    const MassMatrix w = mass_matrix(grid);
    const Entropy entropy = linear_entropy();
    NonmimeticCounterexample report;
    report.node_contributions.resize(3);
    for (Index i = 0; i < 3; ++i)
        report.node_contributions[i] =
            w.weights[i] * entropy.gradient(u.at(i)).dot(d2u.at(i).eval());
    report.production = report.node_contributions.sum();
    report.positive = report.production > 0.0;
    return report;
}

enum class NormKind { max, l2 };

/// Grid-refinement error table with observed orders
/// log(e_{k-1} / e_k) / log(h_{k-1} / h_k) attached to each row after the first.
struct ConvergenceTable {
    struct Row {
        double h = 0.0;
        double error = 0.0;
        double order = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<Row> rows;
    NormKind norm = NormKind::max;
};

inline ConvergenceTable make_convergence_table(std::vector<std::pair<double, double>> h_and_error,
                                               NormKind norm) {
    ConvergenceTable table;
    table.norm = norm;
    for (std::size_t k = 0; k < h_and_error.size(); ++k) {
        ConvergenceTable::Row row;
        row.h = h_and_error[k].first;
        row.error = h_and_error[k].second;
        if (k > 0) {
            const auto& prev = h_and_error[k - 1];
            if (prev.first <= row.h)
                throw std::invalid_argument("ConvergenceTable: h must decrease down the rows");
            if (prev.second > 0.0 && row.error > 0.0)
                row.order = std::log(prev.second / row.error) / std::log(prev.first / row.h);
        }
        table.rows.push_back(row);
    }
    return table;
}

struct ConvergenceCase {
    DiffOp op;
    std::function<double(double)> exact;
};

inline double error_norm(const Vector& e, double h, NormKind norm) {
    if (norm == NormKind::max) return e.cwiseAbs().maxCoeff();
    return std::sqrt(h * e.squaredNorm());
}

/// Apply the operator built for each N to samples of test_fn and tabulate the
/// error against the exact reference. With interior_only, boundary nodes are
/// excluded from the norm.
inline ConvergenceTable convergence_study(const std::function<ConvergenceCase(Index)>& builder,
                                          const std::function<double(double)>& test_fn,
                                          const std::vector<Index>& n_list,
                                          NormKind norm = NormKind::max,
                                          bool interior_only = false) {
    if (n_list.size() < 3)
        throw std::invalid_argument("convergence_study: need at least 3 grid sizes");
    std::vector<std::pair<double, double>> h_and_error;
    for (Index n : n_list) {
        const ConvergenceCase cs = builder(n);
        const Grid& grid = cs.op.grid();
        const GridFunction result = apply(cs.op, sample(test_fn, grid));
        Vector e(grid.size());
        for (Index i = 0; i < grid.size(); ++i)
            e[i] = result.values()(i, 0) - cs.exact(grid.node(i));
        if (interior_only && !grid.periodic() && grid.size() > 2)
            e = e.segment(1, grid.size() - 2).eval();
        h_and_error.emplace_back(grid.spacing(), error_norm(e, grid.spacing(), norm));
    }
    return make_convergence_table(std::move(h_and_error), norm);
}

} // namespace mimetic
