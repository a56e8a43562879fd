#pragma once

#include "mimetic/types.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <string>

namespace mimetic {

/// Convex entropy U with gradient; vector arguments are handled
/// componentwise for the built-in families.
struct Entropy {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::string label;
    bool convex = true;
};

/// U(u) = |u|^2 / 2, U'(u) = u.
inline Entropy square_entropy() {
    return {
        [](const Vector& u) { return 0.5 * u.squaredNorm(); },
        [](const Vector& u) { return u; },
        "square", true};
}

/// U(u) = sum_c u_c, U' = 1. Linear, hence both convex and concave.
inline Entropy linear_entropy() {
    return {
        [](const Vector& u) { return u.sum(); },
        [](const Vector& u) { return Vector::Ones(u.size()); },
        "linear", true};
}

/// Componentwise hinge U(u) = sum_c max{0, u_c - threshold}; the kink makes
/// the gradient discontinuous at the threshold (we take U' = 0 there).
inline Entropy hinge_entropy(double threshold) {
    return {
        [threshold](const Vector& u) {
            double acc = 0.0;
            for (Index c = 0; c < u.size(); ++c) acc += std::max(0.0, u[c] - threshold);
            return acc;
        },
        [threshold](const Vector& u) {
            Vector g(u.size());
            for (Index c = 0; c < u.size(); ++c) g[c] = u[c] > threshold ? 1.0 : 0.0;
            return g;
        },
        "hinge:" + std::to_string(threshold), true};
}

/// C^1 smoothing of the hinge: quadratic blend of half-width `width` around
/// the threshold, linear outside.
inline Entropy smoothed_hinge_entropy(double threshold, double width) {
    if (!(width > 0.0)) throw std::invalid_argument("smoothed_hinge_entropy: width must be positive");
    const auto phi = [threshold, width](double t) {
        const double z = t - threshold;
        if (z <= -width) return 0.0;
        if (z >= width) return z;
        return (z + width) * (z + width) / (4.0 * width);
    };
    const auto dphi = [threshold, width](double t) {
        const double z = t - threshold;
        if (z <= -width) return 0.0;
        if (z >= width) return 1.0;
        return (z + width) / (2.0 * width);
    };
    return {
        [phi](const Vector& u) {
            double acc = 0.0;
            for (Index c = 0; c < u.size(); ++c) acc += phi(u[c]);
            return acc;
        },
        [dphi](const Vector& u) {
            Vector g(u.size());
            for (Index c = 0; c < u.size(); ++c) g[c] = dphi(u[c]);
            return g;
        },
        "smoothhinge:" + std::to_string(threshold) + ":" + std::to_string(width), true};
}

/// Parse an entropy label: square | linear | hinge:<c> | smoothhinge:<c>:<w>.
inline Entropy parse_entropy(const std::string& label) {
    if (label == "square") return square_entropy();
    if (label == "linear") return linear_entropy();
    if (label.rfind("hinge:", 0) == 0)
        return hinge_entropy(std::stod(label.substr(6)));
    if (label.rfind("smoothhinge:", 0) == 0) {
        const std::string rest = label.substr(12);
        const auto sep = rest.find(':');
        if (sep == std::string::npos)
            throw std::invalid_argument("parse_entropy: smoothhinge needs <threshold>:<width>");
        return smoothed_hinge_entropy(std::stod(rest.substr(0, sep)), std::stod(rest.substr(sep + 1)));
    }
    throw std::invalid_argument("parse_entropy: unknown entropy label '" + label + "'");
}

/// Spot-check midpoint convexity U((a+b)/2) <= (U(a)+U(b))/2 on random pairs.
inline bool check_convexity(const Entropy& entropy, Index m, int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int t = 0; t < trials; ++t) {
        Vector a(m), b(m);
        for (Index c = 0; c < m; ++c) { a[c] = dist(rng); b[c] = dist(rng); }
        if (entropy.value(0.5 * (a + b)) > 0.5 * (entropy.value(a) + entropy.value(b)) + 1e-12)
            return false;
    }
    return true;
}

/// Spot-check gradient monotonicity (U'(a) - U'(b)) . (a - b) >= 0.
inline bool check_gradient_monotonicity(const Entropy& entropy, Index m, int trials, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int t = 0; t < trials; ++t) {
        Vector a(m), b(m);
        for (Index c = 0; c < m; ++c) { a[c] = dist(rng); b[c] = dist(rng); }
        if ((entropy.gradient(a) - entropy.gradient(b)).dot(a - b) < -1e-12)
            return false;
    }
    return true;
}

} // namespace mimetic
