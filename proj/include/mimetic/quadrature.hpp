#pragma once

#include "mimetic/types.hpp"

#include <functional>

namespace mimetic {

/// Quadrature rule on the unit interval [0, 1]; weights sum to 1.
struct QuadratureSpec {
    Vector nodes;
    Vector weights;
    int exactness_degree = 0;

    void validate() const {
        if (nodes.size() != weights.size() || nodes.size() < 1)
            throw std::invalid_argument("QuadratureSpec: node/weight mismatch");
        if (std::abs(weights.sum() - 1.0) > 1e-12)
            throw std::invalid_argument("QuadratureSpec: weights must sum to 1");
        if (nodes.minCoeff() < 0.0 || nodes.maxCoeff() > 1.0)
            throw std::invalid_argument("QuadratureSpec: nodes must lie in [0, 1]");
    }
};

/// n-point Gauss-Legendre rule mapped to [0, 1], exact for polynomials of
/// degree <= 2n - 1. Nodes and weights come from the symmetric tridiagonal
/// Jacobi matrix of the Legendre recurrence (Golub-Welsch).
inline QuadratureSpec gauss_legendre_01(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre_01: need n >= 1");
    QuadratureSpec q;
    if (n == 1) {
        q.nodes = Vector::Constant(1, 0.5);
        q.weights = Vector::Constant(1, 1.0);
        q.exactness_degree = 1;
        return q;
    }
    Matrix jacobi = Matrix::Zero(n, n);
    for (int k = 1; k < n; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
    q.nodes.resize(n);
    q.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        // eigenvalues are the nodes on [-1, 1]; map to [0, 1]
        q.nodes[k] = 0.5 * (es.eigenvalues()[k] + 1.0);
        const double v0 = es.eigenvectors()(0, k);
        q.weights[k] = v0 * v0; // 2 v0^2 on [-1,1], halved by the affine map
    }
    q.exactness_degree = 2 * n - 1;
    q.validate();
    return q;
}

/// Default rule used throughout: 16 nodes, exactness degree 31.
inline const QuadratureSpec& default_quadrature() {
    static const QuadratureSpec q = gauss_legendre_01(16);
    return q;
}

} // namespace mimetic
