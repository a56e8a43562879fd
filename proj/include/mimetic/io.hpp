#pragma once

#include "mimetic/bv.hpp"
#include "mimetic/checks.hpp"
#include "mimetic/diff_ops.hpp"
#include "mimetic/grid.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace mimetic {

namespace detail {

inline std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

inline std::string expect_token(std::istream& in, const std::string& key) {
    std::string token;
    if (!(in >> token) || token.rfind(key + "=", 0) != 0)
        throw std::invalid_argument("parse: expected '" + key + "=...'");
    return token.substr(key.size() + 1);
}

} // namespace detail

/// Line-oriented grid (function) format:
///   # grid topology=<p|b> N=<n> [period=<L>] m=<m>
/// followed by one `x value...` row per node.
inline void write_grid_function(std::ostream& out, const GridFunction& u) {
    const Grid& grid = u.grid();
    out << "# grid topology=" << (grid.periodic() ? 'p' : 'b') << " N=" << grid.size();
    if (grid.periodic()) out << " period=" << detail::fmt(grid.period());
    out << " m=" << u.components() << "\n";
    for (Index i = 0; i < grid.size(); ++i) {
        out << detail::fmt(grid.node(i));
        for (Index c = 0; c < u.components(); ++c)
            out << ' ' << detail::fmt(u.values()(i, c));
        out << "\n";
    }
}

inline GridFunction read_grid_function(std::istream& in) {
    std::string hash, kind;
    if (!(in >> hash >> kind) || hash != "#" || kind != "grid")
        throw std::invalid_argument("read_grid_function: missing '# grid' header");
    const std::string topo = detail::expect_token(in, "topology");
    const Index n = std::stoll(detail::expect_token(in, "N"));
    double period = 0.0;
    if (topo == "p") period = std::stod(detail::expect_token(in, "period"));
    else if (topo != "b") throw std::invalid_argument("read_grid_function: bad topology");
    const Index m = std::stoll(detail::expect_token(in, "m"));
    Vector nodes(n);
    Matrix values(n, m);
    for (Index i = 0; i < n; ++i) {
        if (!(in >> nodes[i])) throw std::invalid_argument("read_grid_function: truncated rows");
        for (Index c = 0; c < m; ++c)
            if (!(in >> values(i, c))) throw std::invalid_argument("read_grid_function: truncated rows");
    }
    Grid grid(nodes, topo == "p" ? Topology::periodic : Topology::bounded, period);
    return GridFunction(std::move(grid), std::move(values));
}

/// Step-function format:
///   # step m=<m> a=<a> b=<b>
/// then alternating plateau lines (m values) and breakpoint lines (1 value),
/// starting and ending with a plateau.
inline void write_step_function(std::ostream& out, const StepFunction& u) {
    out << "# step m=" << u.components() << " a=" << detail::fmt(u.lower())
        << " b=" << detail::fmt(u.upper()) << "\n";
    const auto write_plateau = [&](Index k) {
        for (Index c = 0; c < u.components(); ++c)
            out << (c ? " " : "") << detail::fmt(u.plateaus()(k, c));
        out << "\n";
    };
    write_plateau(0);
    for (std::size_t k = 0; k < u.breakpoints().size(); ++k) {
        out << detail::fmt(u.breakpoints()[k]) << "\n";
        write_plateau(static_cast<Index>(k) + 1);
    }
}

inline StepFunction read_step_function(std::istream& in) {
    std::string hash, kind;
    if (!(in >> hash >> kind) || hash != "#" || kind != "step")
        throw std::invalid_argument("read_step_function: missing '# step' header");
    const Index m = std::stoll(detail::expect_token(in, "m"));
    const double a = std::stod(detail::expect_token(in, "a"));
    const double b = std::stod(detail::expect_token(in, "b"));
    std::vector<double> breakpoints;
    std::vector<Vector> plateaus;
    Vector first(m);
    for (Index c = 0; c < m; ++c)
        if (!(in >> first[c])) throw std::invalid_argument("read_step_function: truncated");
    plateaus.push_back(first);
    double x;
    while (in >> x) {
        breakpoints.push_back(x);
        Vector p(m);
        for (Index c = 0; c < m; ++c)
            if (!(in >> p[c])) throw std::invalid_argument("read_step_function: truncated");
        plateaus.push_back(p);
    }
    Matrix pm(static_cast<Index>(plateaus.size()), m);
    for (std::size_t k = 0; k < plateaus.size(); ++k)
        pm.row(static_cast<Index>(k)) = plateaus[k].transpose();
    return StepFunction(a, b, std::move(breakpoints), std::move(pm));
}

/// Coordinate-format export: one `row col coeff` line per stored entry.
inline void write_operator_coordinates(std::ostream& out, const DiffOp& op) {
    for (Index i = 0; i < op.size(); ++i)
        for (const auto& e : op.row(i))
            out << i << ' ' << e.col << ' ' << detail::fmt(e.coeff) << "\n";
}

/// CSV with columns h,error,order (order empty on the first row).
inline void write_convergence_csv(std::ostream& out, const ConvergenceTable& table) {
    out << "h,error,order\n";
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
        const auto& row = table.rows[k];
        out << detail::fmt(row.h) << ',' << detail::fmt(row.error) << ',';
        if (k > 0 && std::isfinite(row.order)) out << detail::fmt(row.order);
        out << "\n";
    }
}

} // namespace mimetic
