#pragma once

#include "mimetic/diff_ops.hpp"
#include "mimetic/grid.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace mimetic {

/// Per-node viscosity values, all >= 0.
class CoefficientField {
public:
    explicit CoefficientField(Vector values) : values_(std::move(values)) {
        if (values_.size() < 1 || values_.minCoeff() < 0.0)
            throw std::invalid_argument("CoefficientField: values must be nonnegative");
    }

    const Vector& values() const { return values_; }
    double operator[](Index i) const { return values_[i]; }
    Index size() const { return values_.size(); }

private:
    Vector values_;
};

/// Diagonal quadrature (norm) matrix with positive weights.
struct MassMatrix {
    Vector weights;

    void validate() const {
        if (weights.size() < 1 || weights.minCoeff() <= 0.0)
            throw std::invalid_argument("MassMatrix: weights must be positive");
    }
};

/// h * diag(1/2, 1, ..., 1, 1/2) on bounded grids, h * identity on periodic
/// ones; weights sum to the domain length.
inline MassMatrix mass_matrix(const Grid& grid) {
    detail::require_uniform(grid, "mass_matrix");
    MassMatrix w;
    w.weights = Vector::Constant(grid.size(), grid.spacing());
    if (!grid.periodic()) {
        w.weights[0] *= 0.5;
        w.weights[grid.size() - 1] *= 0.5;
    }
    w.validate();
    return w;
}

/// Classical second-order Laplacian (u_{i+1} - 2 u_i + u_{i-1}) / h^2 on a
/// uniform periodic grid.
inline DiffOp d2_periodic_order2(const Grid& grid) {
    if (!grid.periodic())
        throw std::invalid_argument("d2_periodic_order2: periodic grid required");
    detail::require_uniform(grid, "d2_periodic_order2");
    const double s = 1.0 / (grid.spacing() * grid.spacing());
    std::vector<DiffOp::Row> rows(static_cast<std::size_t>(grid.size()));
    for (Index i = 0; i < grid.size(); ++i)
        rows[static_cast<std::size_t>(i)] = {
            {grid.wrap(i - 1), s}, {i, -2.0 * s}, {grid.wrap(i + 1), s}};
    return DiffOp(grid, std::move(rows), 2, DiffOp::Kind::second_derivative);
}

/// Fourth-order constant-coefficient second derivative on a uniform periodic
/// grid: (-1/12, 4/3, -5/2, 4/3, -1/12) / h^2.
inline DiffOp d2_periodic_order4(const Grid& grid) {
    if (!grid.periodic())
        throw std::invalid_argument("d2_periodic_order4: periodic grid required");
    detail::require_uniform(grid, "d2_periodic_order4");
    if (grid.size() < 5)
        throw std::invalid_argument("d2_periodic_order4: need at least 5 nodes");
    const double s = 1.0 / (grid.spacing() * grid.spacing());
    std::vector<DiffOp::Row> rows(static_cast<std::size_t>(grid.size()));
    for (Index i = 0; i < grid.size(); ++i)
        rows[static_cast<std::size_t>(i)] = {
            {grid.wrap(i - 2), -s / 12.0}, {grid.wrap(i - 1), 4.0 * s / 3.0},
            {i, -2.5 * s},
            {grid.wrap(i + 1), 4.0 * s / 3.0}, {grid.wrap(i + 2), -s / 12.0}};
    return DiffOp(grid, std::move(rows), 4, DiffOp::Kind::second_derivative);
}

/// Variable-coefficient second-order operator for d/dx (eps du/dx). Interior
/// rows use the compatible narrow stencil; bounded grids require the
/// coefficient to vanish at both ends and get the reduced closures
/// eps_1 (u_1 - u_0)/h^2 and -eps_{N-1} (u_N - u_{N-1})/h^2.
inline DiffOp d2_varcoef_sbp(const Grid& grid, const CoefficientField& eps) {
    detail::require_uniform(grid, "d2_varcoef_sbp");
    if (eps.size() != grid.size())
        throw std::invalid_argument("d2_varcoef_sbp: one coefficient per node required");
    const Index n = grid.size();
    const double s = 1.0 / (grid.spacing() * grid.spacing());
    std::vector<DiffOp::Row> rows(static_cast<std::size_t>(n));
    if (grid.periodic()) {
        for (Index i = 0; i < n; ++i) {
            const Index im = grid.wrap(i - 1), ip = grid.wrap(i + 1);
            rows[static_cast<std::size_t>(i)] = {
                {im, 0.5 * (eps[im] + eps[i]) * s},
                {i, -0.5 * (eps[im] + 2.0 * eps[i] + eps[ip]) * s},
                {ip, 0.5 * (eps[i] + eps[ip]) * s}};
        }
    } else {
        if (eps[0] != 0.0 || eps[n - 1] != 0.0)
            throw unsupported_error(
                "d2_varcoef_sbp: bounded closures only shipped for eps_0 = 0 = eps_N");
        rows.front() = {{0, -eps[1] * s}, {1, eps[1] * s}};
        rows.back() = {{n - 2, eps[n - 2] * s}, {n - 1, -eps[n - 2] * s}};
        for (Index i = 1; i + 1 < n; ++i)
            rows[static_cast<std::size_t>(i)] = {
                {i - 1, 0.5 * (eps[i - 1] + eps[i]) * s},
                {i, -0.5 * (eps[i - 1] + 2.0 * eps[i] + eps[i + 1]) * s},
                {i + 1, 0.5 * (eps[i] + eps[i + 1]) * s}};
    }
    return DiffOp(grid, std::move(rows), 2, DiffOp::Kind::second_derivative);
}

/// Non-compatible second-order discretisation of d/dx (eps du/dx):
/// eps_i D2 u + (D eps)(D u) with central differences. Consistent but not
/// entropy dissipative in general.
inline DiffOp d2_varcoef_nonmimetic(const Grid& grid, const CoefficientField& eps) {
    if (!grid.periodic())
        throw std::invalid_argument("d2_varcoef_nonmimetic: periodic grid required");
    detail::require_uniform(grid, "d2_varcoef_nonmimetic");
    if (eps.size() != grid.size())
        throw std::invalid_argument("d2_varcoef_nonmimetic: one coefficient per node required");
    const Index n = grid.size();
    const double h = grid.spacing();
    const double s = 1.0 / (h * h);
    std::vector<DiffOp::Row> rows(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const Index im = grid.wrap(i - 1), ip = grid.wrap(i + 1);
        const double deps = (eps[ip] - eps[im]) / (2.0 * h);
        rows[static_cast<std::size_t>(i)] = {
            {im, eps[i] * s - deps / (2.0 * h)},
            {i, -2.0 * eps[i] * s},
            {ip, eps[i] * s + deps / (2.0 * h)}};
    }
    return DiffOp(grid, std::move(rows), 2, DiffOp::Kind::second_derivative);
}

/// A constant-coefficient stencil given by integer offsets k and coefficients
/// c_k, together with the grid spacing it refers to.
struct Stencil {
    std::vector<int> offsets;
    std::vector<double> coeffs;
    double h = 1.0;
};

/// Moment residuals of a second-derivative stencil: sums c_k (k h)^q for
/// q = 0..4 minus the targets (0, 0, 2, 0, 0). Vanishing residuals through
/// moment 4 are the order conditions for accuracy order 3.
inline std::array<double, 5> moment_conditions(const Stencil& stencil) {
    if (stencil.offsets.size() != stencil.coeffs.size())
        throw std::invalid_argument("moment_conditions: offset/coefficient mismatch");
    static const std::array<double, 5> targets = {0.0, 0.0, 2.0, 0.0, 0.0};
    std::array<double, 5> residuals{};
    for (int q = 0; q <= 4; ++q) {
        double acc = 0.0;
        for (std::size_t k = 0; k < stencil.offsets.size(); ++k)
            acc += stencil.coeffs[k] * std::pow(stencil.offsets[k] * stencil.h, q);
        residuals[static_cast<std::size_t>(q)] = acc - targets[static_cast<std::size_t>(q)];
    }
    return residuals;
}

/// Interior row of a constant-coefficient periodic operator as a stencil.
inline Stencil interior_stencil(const DiffOp& op, Index row) {
    Stencil s;
    s.h = op.grid().spacing();
    for (const auto& e : op.row(row)) {
        const double d = op.grid().displacement(row, e.col);
        s.offsets.push_back(static_cast<int>(std::lround(d / s.h)));
        s.coeffs.push_back(e.coeff);
    }
    return s;
}

/// Smallest |k| != 0 with c_k < 0, preferring the positive side; nullopt when
/// all off-centre coefficients are nonnegative.
inline std::optional<int> find_negative_offcenter(const Stencil& stencil) {
    int max_off = 0;
    for (int k : stencil.offsets) max_off = std::max(max_off, std::abs(k));
    const auto coeff_at = [&](int k) -> double {
        for (std::size_t j = 0; j < stencil.offsets.size(); ++j)
            if (stencil.offsets[j] == k) return stencil.coeffs[j];
        return 0.0;
    };
    for (int d = 1; d <= max_off; ++d) {
        if (coeff_at(d) < 0.0) return d;
        if (coeff_at(-d) < 0.0) return -d;
    }
    return std::nullopt;
}

} // namespace mimetic
