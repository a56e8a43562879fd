#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mimetic/quadrature.hpp"

#include <cmath>

using namespace mimetic;

TEST_CASE("gauss-legendre weights sum to one and nodes lie in [0, 1]") {
    for (int n : {1, 2, 3, 5, 8, 16}) {
        const QuadratureSpec q = gauss_legendre_01(n);
        CHECK(q.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(q.nodes.minCoeff() >= 0.0);
        CHECK(q.nodes.maxCoeff() <= 1.0);
    }
}

TEST_CASE("n-point rule integrates monomials exactly up to degree 2n - 1") {
    for (int n : {1, 2, 3, 4, 8, 16}) {
        const QuadratureSpec q = gauss_legendre_01(n);
        REQUIRE(q.exactness_degree == 2 * n - 1);
        for (int d = 0; d <= q.exactness_degree; ++d) {
            double acc = 0.0;
            for (Index k = 0; k < q.nodes.size(); ++k)
                acc += q.weights[k] * std::pow(q.nodes[k], d);
            // oracle: int_0^1 s^d ds = 1 / (d + 1)
            CHECK(acc == doctest::Approx(1.0 / (d + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("rule is not exact beyond its stated degree") {
    const QuadratureSpec q = gauss_legendre_01(2);
    double acc = 0.0;
    for (Index k = 0; k < q.nodes.size(); ++k)
        acc += q.weights[k] * std::pow(q.nodes[k], 4);
    CHECK(std::abs(acc - 0.2) > 1e-4);
}

TEST_CASE("default quadrature has 16 nodes and degree 31") {
    CHECK(default_quadrature().nodes.size() == 16);
    CHECK(default_quadrature().exactness_degree == 31);
}
