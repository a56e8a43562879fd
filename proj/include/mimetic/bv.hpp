#pragma once

#include "mimetic/quadrature.hpp"
#include "mimetic/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

namespace mimetic {

/// Piecewise-constant function of bounded variation on [a, b]: strictly
/// increasing interior breakpoints and one plateau value (in R^m) more than
/// there are breakpoints.
class StepFunction {
public:
    StepFunction(double a, double b, std::vector<double> breakpoints, Matrix plateaus)
        : a_(a), b_(b), breakpoints_(std::move(breakpoints)), plateaus_(std::move(plateaus)) {
        if (!(a_ < b_)) throw std::invalid_argument("StepFunction: need a < b");
        if (plateaus_.rows() != static_cast<Index>(breakpoints_.size()) + 1)
            throw std::invalid_argument("StepFunction: plateau count must be breakpoints + 1");
        if (plateaus_.cols() < 1)
            throw std::invalid_argument("StepFunction: need m >= 1 components");
        double prev = a_;
        for (double x : breakpoints_) {
            if (!(x > prev) || !(x < b_))
                throw std::invalid_argument("StepFunction: breakpoints must increase strictly inside (a, b)");
            prev = x;
        }
    }

    double lower() const { return a_; }
    double upper() const { return b_; }
    Index components() const { return plateaus_.cols(); }
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const Matrix& plateaus() const { return plateaus_; }

    /// Left and right limits at breakpoint index k.
    Vector left_limit(std::size_t k) const { return plateaus_.row(static_cast<Index>(k)).transpose(); }
    Vector right_limit(std::size_t k) const { return plateaus_.row(static_cast<Index>(k) + 1).transpose(); }

    /// Plateau value at a point that is not a breakpoint.
    Vector operator()(double x) const {
        const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
        return plateaus_.row(static_cast<Index>(it - breakpoints_.begin())).transpose();
    }

    bool same_domain(const StepFunction& other, double tol = 0.0) const {
        return std::abs(a_ - other.a_) <= tol && std::abs(b_ - other.b_) <= tol;
    }

    /// Re-express this step function on a superset of its breakpoints.
    /// Extra breakpoints get zero jumps (equal neighbouring plateaus).
    StepFunction refined(const std::vector<double>& all_breakpoints) const {
        Matrix plateaus(static_cast<Index>(all_breakpoints.size()) + 1, components());
        plateaus.row(0) = plateaus_.row(0);
        for (std::size_t k = 0; k < all_breakpoints.size(); ++k) {
            // plateau right of x has as many original breakpoints <= x before it
            const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), all_breakpoints[k]);
            plateaus.row(static_cast<Index>(k) + 1) = plateaus_.row(static_cast<Index>(it - breakpoints_.begin()));
        }
        return StepFunction(a_, b_, all_breakpoints, std::move(plateaus));
    }

private:
    double a_, b_;
    std::vector<double> breakpoints_;
    Matrix plateaus_;
};

/// Finite sum of Dirac measures with vector weights; locations distinct.
struct PointMassMeasure {
    struct Atom {
        double location;
        Vector weight;
    };
    std::vector<Atom> atoms;

    /// Sum of all atom weights.
    Vector total(Index m) const {
        Vector t = Vector::Zero(m);
        for (const auto& a : atoms) t += a.weight;
        return t;
    }

    double max_abs_weight() const {
        double w = 0.0;
        for (const auto& a : atoms) w = std::max(w, a.weight.cwiseAbs().maxCoeff());
        return w;
    }
};

/// Distributional derivative of a step function: one atom per breakpoint with
/// weight u_+ - u_-. Zero jumps keep their (zero-weight) atoms.
inline PointMassMeasure derivative_measure(const StepFunction& u) {
    PointMassMeasure mu;
    mu.atoms.reserve(u.breakpoints().size());
    for (std::size_t k = 0; k < u.breakpoints().size(); ++k)
        mu.atoms.push_back({u.breakpoints()[k], u.right_limit(k) - u.left_limit(k)});
    return mu;
}

/// Vol'pert's averaged composition across a jump: the segment average
/// int_0^1 g(u_- + s (u_+ - u_-)) ds, exact for polynomial g up to the
/// quadrature's exactness degree.
inline Vector averaged_composition(const std::function<Vector(const Vector&)>& g,
                                   const Vector& u_minus, const Vector& u_plus,
                                   const QuadratureSpec& quad = default_quadrature()) {
    if (u_minus.size() != u_plus.size())
        throw std::invalid_argument("averaged_composition: endpoint dimension mismatch");
    const Vector delta = u_plus - u_minus;
    if (delta.cwiseAbs().maxCoeff() == 0.0) return g(u_minus);
    Vector acc = quad.weights[0] * g(u_minus + quad.nodes[0] * delta);
    for (Index q = 1; q < quad.nodes.size(); ++q)
        acc += quad.weights[q] * g(u_minus + quad.nodes[q] * delta);
    return acc;
}

/// Scalar average of f' across [a, b] via the divided difference
/// (f(b) - f(a)) / (b - a) when the jump is well separated, f' at the
/// midpoint otherwise.
inline double averaged_scalar_derivative(const std::function<double(double)>& f,
                                         const std::function<double(double)>& f_prime,
                                         double a, double b) {
    if (std::abs(b - a) > 1e-8 * (1.0 + std::abs(a) + std::abs(b)))
        return (f(b) - f(a)) / (b - a);
    return f_prime(0.5 * (a + b));
}

/// Merged, deduplicated breakpoint set of two step functions.
inline std::vector<double> merged_breakpoints(const StepFunction& u, const StepFunction& v) {
    std::vector<double> all = u.breakpoints();
    all.insert(all.end(), v.breakpoints().begin(), v.breakpoints().end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

/// Atoms of d(uv) - u_hat dv - v_hat du for scalar step functions, where the
/// hats are arithmetic means across each jump. Algebraically exact, so all
/// weights are zero up to rounding.
inline PointMassMeasure volpert_product_residual(const StepFunction& u, const StepFunction& v) {
    if (u.components() != 1 || v.components() != 1)
        throw std::invalid_argument("volpert_product_residual: scalar step functions required");
    if (!u.same_domain(v))
        throw std::invalid_argument("volpert_product_residual: domains must match");
    const std::vector<double> bps = merged_breakpoints(u, v);
    const StepFunction ur = u.refined(bps);
    const StepFunction vr = v.refined(bps);
    PointMassMeasure res;
    res.atoms.reserve(bps.size());
    for (std::size_t k = 0; k < bps.size(); ++k) {
        const double um = ur.left_limit(k)[0], up = ur.right_limit(k)[0];
        const double vm = vr.left_limit(k)[0], vp = vr.right_limit(k)[0];
        const double jump_uv = up * vp - um * vm;
        const double split = 0.5 * (um + up) * (vp - vm) + 0.5 * (vm + vp) * (up - um);
        res.atoms.push_back({bps[k], Vector::Constant(1, jump_uv - split)});
    }
    return res;
}

/// Atoms of d f(u) - avg(f'(u)) . du across each jump of u. The scalar case
/// uses the divided-difference average (exact); vector-valued u averages the
/// gradient with the supplied quadrature.
inline PointMassMeasure volpert_chain_residual(const std::function<double(const Vector&)>& f,
                                               const std::function<Vector(const Vector&)>& f_grad,
                                               const StepFunction& u,
                                               const QuadratureSpec& quad = default_quadrature()) {
    PointMassMeasure res;
    res.atoms.reserve(u.breakpoints().size());
    for (std::size_t k = 0; k < u.breakpoints().size(); ++k) {
        const Vector um = u.left_limit(k), up = u.right_limit(k);
        const double jump_f = f(up) - f(um);
        double split;
        if (u.components() == 1) {
            const double avg = averaged_scalar_derivative(
                [&](double x) { return f(Vector::Constant(1, x)); },
                [&](double x) { return f_grad(Vector::Constant(1, x))[0]; }, um[0], up[0]);
            split = avg * (up[0] - um[0]);
        } else {
            split = averaged_composition(f_grad, um, up, quad).dot(up - um);
        }
        res.atoms.push_back({u.breakpoints()[k], Vector::Constant(1, jump_f - split)});
    }
    return res;
}

} // namespace mimetic
