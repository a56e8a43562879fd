#pragma once

#include "mimetic/bv.hpp"
#include "mimetic/grid.hpp"
#include "mimetic/quadrature.hpp"

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace mimetic {

/// Linear operator on grid functions, stored row-wise as sparse stencil
/// coefficients. Immutable after construction.
class DiffOp {
public:
    enum class Kind { central_periodic, sbp_bounded, collocation, averaging, second_derivative };

    struct Entry {
        Index col;
        double coeff;
    };
    using Row = std::vector<Entry>;

    DiffOp(Grid grid, std::vector<Row> rows, int order, Kind kind)
        : grid_(std::move(grid)), rows_(std::move(rows)), order_(order), kind_(kind) {
        if (static_cast<Index>(rows_.size()) != grid_.size())
            throw std::invalid_argument("DiffOp: one row per grid node required");
        for (const auto& row : rows_)
            for (const auto& e : row) {
                if (e.col < 0 || e.col >= grid_.size() || !std::isfinite(e.coeff))
                    throw std::invalid_argument("DiffOp: bad row entry");
            }
    }

    const Grid& grid() const { return grid_; }
    const std::vector<Row>& rows() const { return rows_; }
    const Row& row(Index i) const { return rows_[static_cast<std::size_t>(i)]; }
    int order() const { return order_; }
    Kind kind() const { return kind_; }
    Index size() const { return grid_.size(); }

    /// How many derivatives the operator approximates (0 for averaging).
    int derivative_count() const { return kind_ == Kind::averaging ? 0 : kind_ == Kind::second_derivative ? 2 : 1; }

    /// Leftmost and rightmost stencil column of row i.
    std::pair<Index, Index> row_span(Index i) const {
        const Row& r = row(i);
        if (r.empty()) return {i, i};
        Index lo = r.front().col, hi = r.front().col;
        for (const auto& e : r) {
            lo = std::min(lo, e.col);
            hi = std::max(hi, e.col);
        }
        return {lo, hi};
    }

private:
    Grid grid_;
    std::vector<Row> rows_;
    int order_;
    Kind kind_;
};

/// (op u)_i = sum_j op_ij u_j, componentwise for m > 1.
inline GridFunction apply(const DiffOp& op, const GridFunction& u) {
    if (!op.grid().same_nodes(u.grid()))
        throw std::invalid_argument("apply: operator and function live on different grids");
    Matrix out = Matrix::Zero(u.size(), u.components());
    for (Index i = 0; i < op.size(); ++i)
        for (const auto& e : op.row(i))
            out.row(i) += e.coeff * u.values().row(e.col);
    return GridFunction(u.grid(), std::move(out));
}

namespace detail {

inline void require_uniform(const Grid& grid, const char* who) {
    if (!grid.uniform())
        throw std::invalid_argument(std::string(who) + ": uniform grid required");
}

} // namespace detail

/// Central first-derivative stencils of order p in {2, 4, 6} on a uniform
/// periodic grid.
inline DiffOp central_periodic(const Grid& grid, int p) {
    if (!grid.periodic())
        throw std::invalid_argument("central_periodic: periodic grid required");
    detail::require_uniform(grid, "central_periodic");
    static const std::vector<std::vector<double>> half_stencils = {
        {1.0 / 2.0},
        {2.0 / 3.0, -1.0 / 12.0},
        {3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0},
    };
    if (p != 2 && p != 4 && p != 6)
        throw std::invalid_argument("central_periodic: order must be 2, 4 or 6");
    if (grid.size() < p + 1)
        throw std::invalid_argument("central_periodic: grid too small for requested order");
    const auto& half = half_stencils[static_cast<std::size_t>(p / 2 - 1)];
    const double inv_h = 1.0 / grid.spacing();
    std::vector<DiffOp::Row> rows(static_cast<std::size_t>(grid.size()));
    for (Index i = 0; i < grid.size(); ++i) {
        DiffOp::Row row;
        for (std::size_t k = 0; k < half.size(); ++k) {
            const Index off = static_cast<Index>(k) + 1;
            row.push_back({grid.wrap(i + off), half[k] * inv_h});
            row.push_back({grid.wrap(i - off), -half[k] * inv_h});
        }
        rows[static_cast<std::size_t>(i)] = std::move(row);
    }
    return DiffOp(grid, std::move(rows), p, DiffOp::Kind::central_periodic);
}

/// Second-order SBP first derivative on a bounded uniform grid: central
/// interior rows with one-sided first-order closures (u_1 - u_0)/h and
/// (u_N - u_{N-1})/h.
inline DiffOp sbp_first_order2(const Grid& grid) {
    if (grid.periodic())
        throw std::invalid_argument("sbp_first_order2: bounded grid required");
    detail::require_uniform(grid, "sbp_first_order2");
    const Index n = grid.size();
    const double inv_h = 1.0 / grid.spacing();
    std::vector<DiffOp::Row> rows(static_cast<std::size_t>(n));
    rows.front() = {{0, -inv_h}, {1, inv_h}};
    rows.back() = {{n - 2, -inv_h}, {n - 1, inv_h}};
    for (Index i = 1; i + 1 < n; ++i)
        rows[static_cast<std::size_t>(i)] = {{i - 1, -0.5 * inv_h}, {i + 1, 0.5 * inv_h}};
    return DiffOp(grid, std::move(rows), 2, DiffOp::Kind::sbp_bounded);
}

/// Polynomial collocation derivative matrix on Lobatto-Legendre nodes in
/// [-1, 1]; only the 2- and 3-node cases are supported.
inline DiffOp collocation_lobatto(int n_nodes) {
    if (n_nodes == 2) {
        Vector nodes(2);
        nodes << -1.0, 1.0;
        Grid grid(nodes, Topology::bounded);
        std::vector<DiffOp::Row> rows = {
            {{0, -0.5}, {1, 0.5}},
            {{0, -0.5}, {1, 0.5}},
        };
        return DiffOp(std::move(grid), std::move(rows), 1, DiffOp::Kind::collocation);
    }
    if (n_nodes == 3) {
        Vector nodes(3);
        nodes << -1.0, 0.0, 1.0;
        Grid grid(nodes, Topology::bounded);
        std::vector<DiffOp::Row> rows = {
            {{0, -1.5}, {1, 2.0}, {2, -0.5}},
            {{0, -0.5}, {2, 0.5}},
            {{0, 0.5}, {1, -2.0}, {2, 1.5}},
        };
        return DiffOp(std::move(grid), std::move(rows), 2, DiffOp::Kind::collocation);
    }
    throw std::invalid_argument("collocation_lobatto: only 2 or 3 nodes supported");
}

/// Averaging operator A: (u_{i+1} + u_{i-1})/2 in the interior with closures
/// (u_1 + u_0)/2 and (u_N + u_{N-1})/2 on bounded grids.
inline DiffOp averaging_A(const Grid& grid) {
    detail::require_uniform(grid, "averaging_A");
    const Index n = grid.size();
    std::vector<DiffOp::Row> rows(static_cast<std::size_t>(n));
    if (grid.periodic()) {
        for (Index i = 0; i < n; ++i)
            rows[static_cast<std::size_t>(i)] = {{grid.wrap(i - 1), 0.5}, {grid.wrap(i + 1), 0.5}};
    } else {
        rows.front() = {{0, 0.5}, {1, 0.5}};
        rows.back() = {{n - 2, 0.5}, {n - 1, 0.5}};
        for (Index i = 1; i + 1 < n; ++i)
            rows[static_cast<std::size_t>(i)] = {{i - 1, 0.5}, {i + 1, 0.5}};
    }
    return DiffOp(grid, std::move(rows), 2, DiffOp::Kind::averaging);
}

namespace detail {

/// Segment average of the gradient between the leftmost and rightmost stencil
/// point of each row, located via signed (wrap-aware) displacements.
inline GridFunction segment_averaged_gradient(const std::function<Vector(const Vector&)>& f_grad,
                                              const GridFunction& u, const DiffOp& op_shape,
                                              const QuadratureSpec& quad, bool strict) {
    if (!op_shape.grid().same_nodes(u.grid()))
        throw std::invalid_argument("averaged_gradient_Afp: grid mismatch");
    const Grid& grid = op_shape.grid();
    Matrix out(u.size(), u.components());
    for (Index i = 0; i < u.size(); ++i) {
        Index lo = i, hi = i;
        double dlo = 0.0, dhi = 0.0;
        for (const auto& e : op_shape.row(i)) {
            const double d = grid.displacement(i, e.col);
            if (d < dlo) { dlo = d; lo = e.col; }
            if (d > dhi) { dhi = d; hi = e.col; }
        }
        if (strict && dhi - dlo > 2.0 * grid.spacing() * (1.0 + 1e-12))
            throw unsupported_error("averaged_gradient_Afp: stencil wider than 3 points");
        out.row(i) = averaged_composition(f_grad, u.at(lo), u.at(hi), quad).transpose();
    }
    return GridFunction(u.grid(), std::move(out));
}

} // namespace detail

/// Nonlinear averaging operator A_{f'}: per node, the segment average of the
/// gradient between the endpoints of the matching 3-point second-order
/// stencil. Wider operators are rejected; no such averaging exists for them.
inline GridFunction averaged_gradient_Afp(const std::function<Vector(const Vector&)>& f_grad,
                                          const GridFunction& u, const DiffOp& op_shape,
                                          const QuadratureSpec& quad = default_quadrature()) {
    if (op_shape.derivative_count() != 1 || op_shape.order() > 2)
        throw unsupported_error("averaged_gradient_Afp: 3-point second-order derivative operator required");
    return detail::segment_averaged_gradient(f_grad, u, op_shape, quad, /*strict=*/true);
}

/// Interior/boundary accuracy orders detected from polynomial exactness.
struct ExactnessOrder {
    int interior = 0;
    int boundary = 0;
};

namespace detail {

/// Largest exact polynomial degree of a single row, probed with monomials
/// centred at the row's node and scaled by the stencil width.
inline int row_exact_degree(const DiffOp& op, Index i, int max_degree) {
    const Grid& grid = op.grid();
    const int der = op.derivative_count();
    std::vector<double> disp;
    std::vector<double> coeff;
    double width = grid.spacing();
    for (const auto& e : op.row(i)) {
        const double d = grid.displacement(i, e.col);
        disp.push_back(d);
        coeff.push_back(e.coeff);
        width = std::max(width, std::abs(d));
    }
    int degree = -1;
    for (int q = 0; q <= max_degree; ++q) {
        // psi(x) = ((x - x_i)/width)^q; its der-th derivative at x_i
        double target = 0.0;
        if (q == der) {
            double fact = 1.0;
            for (int k = 2; k <= der; ++k) fact *= k;
            target = fact / std::pow(width, der);
        }
        double value = 0.0, scale = std::abs(target) + std::pow(grid.spacing() / width, der);
        for (std::size_t k = 0; k < disp.size(); ++k) {
            const double term = coeff[k] * std::pow(disp[k] / width, q);
            value += term;
            scale += std::abs(term);
        }
        if (std::abs(value - target) > 1e-10 * scale) break;
        degree = q;
    }
    return degree;
}

} // namespace detail

/// Detected accuracy order: largest p such that the operator is exact for
/// polynomials of the matching degree (degree p for first derivatives,
/// p + 1 for second derivatives, p - 1 for averaging). SBP and bounded
/// averaging operators report boundary rows separately.
inline ExactnessOrder polynomial_exactness_order(const DiffOp& op, int max_order = 12) {
    const int der = op.derivative_count();
    const int max_degree = max_order + der;
    const bool has_boundary_rows =
        !op.grid().periodic() &&
        (op.kind() == DiffOp::Kind::sbp_bounded || op.kind() == DiffOp::Kind::averaging ||
         op.kind() == DiffOp::Kind::second_derivative);
    const Index n = op.size();
    int interior_degree = max_degree, boundary_degree = max_degree;
    bool saw_interior = false, saw_boundary = false;
    for (Index i = 0; i < n; ++i) {
        const int d = detail::row_exact_degree(op, i, max_degree);
        const bool boundary = has_boundary_rows && (i == 0 || i == n - 1);
        if (boundary) {
            boundary_degree = std::min(boundary_degree, d);
            saw_boundary = true;
        } else {
            interior_degree = std::min(interior_degree, d);
            saw_interior = true;
        }
    }
    const auto to_order = [&](int degree) {
        return std::min(max_order, degree - der + 1);
    };
    ExactnessOrder out;
    out.interior = saw_interior ? to_order(interior_degree) : 0;
    out.boundary = saw_boundary ? to_order(boundary_degree) : out.interior;
    if (!saw_interior) out.interior = out.boundary;
    return out;
}

/// Per-node leading error coefficient C_i h^p = sum_j op_ij (x_j - x_i)^{p+1} / (p+1)!
/// for an operator exact to order p; for first derivatives this is the factor
/// multiplying u^{(p+1)}(x_i) in (op u)_i = u'(x_i) + u^{(p+1)}(x_i) C_i h^p + O(h^{p+1}).
inline Vector leading_error_coefficient(const DiffOp& op, int p) {
    const Grid& grid = op.grid();
    double factorial = 1.0;
    for (int k = 2; k <= p + 1; ++k) factorial *= k;
    Vector c(op.size());
    for (Index i = 0; i < op.size(); ++i) {
        double acc = 0.0;
        for (const auto& e : op.row(i))
            acc += e.coeff * std::pow(grid.displacement(i, e.col), p + 1);
        c[i] = acc / factorial;
    }
    return c;
}

} // namespace mimetic
