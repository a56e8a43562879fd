#pragma once

#include "mimetic/types.hpp"

#include <cmath>
#include <functional>
#include <utility>

namespace mimetic {

enum class Topology { periodic, bounded };

/// One-dimensional grid with strictly increasing nodes. Periodic grids store
/// N distinct nodes and a period L > x_{N-1} - x_0; index arithmetic wraps
/// modulo N. Immutable after construction.
class Grid {
public:
    Grid(Vector nodes, Topology topology, double period = 0.0)
        : nodes_(std::move(nodes)), topology_(topology), period_(period) {
        if (nodes_.size() < 2)
            throw std::invalid_argument("Grid: need at least 2 nodes");
        double hmin = std::numeric_limits<double>::infinity();
        for (Index i = 0; i + 1 < nodes_.size(); ++i) {
            const double dx = nodes_[i + 1] - nodes_[i];
            if (dx <= 0.0)
                throw std::invalid_argument("Grid: nodes must be strictly increasing");
            hmin = std::min(hmin, dx);
        }
        if (topology_ == Topology::periodic) {
            const double span = nodes_[nodes_.size() - 1] - nodes_[0];
            if (!(period_ > span))
                throw std::invalid_argument("Grid: period must exceed the node span");
            hmin = std::min(hmin, period_ - span);
        }
        h_ = hmin;
    }

    Index size() const { return nodes_.size(); }
    const Vector& nodes() const { return nodes_; }
    double node(Index i) const { return nodes_[i]; }
    Topology topology() const { return topology_; }
    bool periodic() const { return topology_ == Topology::periodic; }
    double spacing() const { return h_; }

    double period() const {
        if (!periodic())
            throw std::invalid_argument("Grid: period only defined for periodic grids");
        return period_;
    }

    /// Signed displacement x_j - x_i, wrapped into (-L/2, L/2] on periodic grids.
    double displacement(Index i, Index j) const {
        double d = nodes_[j] - nodes_[i];
        if (periodic()) {
            d -= period_ * std::round(d / period_);
            if (d <= -0.5 * period_) d += period_;
        }
        return d;
    }

    Index wrap(Index i) const {
        const Index n = size();
        return ((i % n) + n) % n;
    }

    bool uniform(double rel_tol = 1e-12) const {
        const double tol = rel_tol * (std::abs(nodes_[0]) + std::abs(nodes_[size() - 1]) + h_);
        for (Index i = 0; i + 1 < size(); ++i)
            if (std::abs((nodes_[i + 1] - nodes_[i]) - h_) > tol) return false;
        if (periodic() && std::abs((period_ - (nodes_[size() - 1] - nodes_[0])) - h_) > tol)
            return false;
        return true;
    }

    bool same_nodes(const Grid& other, double tol = 0.0) const {
        if (size() != other.size() || topology_ != other.topology_) return false;
        for (Index i = 0; i < size(); ++i)
            if (std::abs(nodes_[i] - other.nodes_[i]) > tol) return false;
        return true;
    }

private:
    Vector nodes_;
    Topology topology_;
    double period_;
    double h_;
};

/// Equally spaced grid on [a, b]. Periodic grids carry N distinct nodes and
/// period b - a (the node at b is identified with the one at a); bounded
/// grids carry N + 1 nodes including both endpoints.
inline Grid uniform_grid(double a, double b, Index n_cells, Topology topology) {
    if (!(a < b)) throw std::invalid_argument("uniform_grid: need a < b");
    if (n_cells < 2) throw std::invalid_argument("uniform_grid: need at least 2 cells");
    const double h = (b - a) / static_cast<double>(n_cells);
    const Index n_nodes = topology == Topology::periodic ? n_cells : n_cells + 1;
    Vector nodes(n_nodes);
    for (Index i = 0; i < n_nodes; ++i)
        nodes[i] = a + h * static_cast<double>(i);
    return Grid(std::move(nodes), topology, topology == Topology::periodic ? b - a : 0.0);
}

/// Uniform refinement: same interval and topology, factor times as many cells.
inline Grid refine(const Grid& grid, Index factor) {
    if (factor < 2) throw std::invalid_argument("refine: factor must be >= 2");
    if (!grid.uniform()) throw unsupported_error("refine: only uniform grids supported");
    const double a = grid.node(0);
    if (grid.periodic()) {
        const Index n = grid.size() * factor;
        return uniform_grid(a, a + grid.period(), n, Topology::periodic);
    }
    const Index n = (grid.size() - 1) * factor;
    return uniform_grid(a, grid.node(grid.size() - 1), n, Topology::bounded);
}

/// Per-node values with m >= 1 components, stored as an N x m matrix.
class GridFunction {
public:
    GridFunction(Grid grid, Matrix values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (values_.rows() != grid_.size())
            throw std::invalid_argument("GridFunction: one value row per node required");
        if (values_.cols() < 1)
            throw std::invalid_argument("GridFunction: need m >= 1 components");
    }

    const Grid& grid() const { return grid_; }
    const Matrix& values() const { return values_; }
    Matrix& values() { return values_; }
    Index size() const { return values_.rows(); }
    Index components() const { return values_.cols(); }

    /// Value vector at node i.
    Vector at(Index i) const { return values_.row(i).transpose(); }

    /// Pointwise product, componentwise for m > 1.
    friend GridFunction operator*(const GridFunction& a, const GridFunction& b) {
        if (!a.grid_.same_nodes(b.grid_) || a.components() != b.components())
            throw std::invalid_argument("GridFunction: operand mismatch");
        return GridFunction(a.grid_, a.values_.cwiseProduct(b.values_));
    }
    friend GridFunction operator+(const GridFunction& a, const GridFunction& b) {
        if (!a.grid_.same_nodes(b.grid_) || a.components() != b.components())
            throw std::invalid_argument("GridFunction: operand mismatch");
        return GridFunction(a.grid_, a.values_ + b.values_);
    }
    friend GridFunction operator-(const GridFunction& a, const GridFunction& b) {
        if (!a.grid_.same_nodes(b.grid_) || a.components() != b.components())
            throw std::invalid_argument("GridFunction: operand mismatch");
        return GridFunction(a.grid_, a.values_ - b.values_);
    }
    friend GridFunction operator*(double s, const GridFunction& a) {
        return GridFunction(a.grid_, s * a.values_);
    }

private:
    Grid grid_;
    Matrix values_;
};

/// Point samples of a scalar function.
inline GridFunction sample(const std::function<double(double)>& f, const Grid& grid) {
    Matrix values(grid.size(), 1);
    for (Index i = 0; i < grid.size(); ++i)
        values(i, 0) = f(grid.node(i));
    return GridFunction(grid, std::move(values));
}

/// Point samples of a vector-valued function with m components.
inline GridFunction sample(const std::function<Vector(double)>& f, Index m, const Grid& grid) {
    Matrix values(grid.size(), m);
    for (Index i = 0; i < grid.size(); ++i) {
        const Vector v = f(grid.node(i));
        if (v.size() != m)
            throw std::invalid_argument("sample: component count mismatch");
        values.row(i) = v.transpose();
    }
    return GridFunction(grid, std::move(values));
}

} // namespace mimetic
