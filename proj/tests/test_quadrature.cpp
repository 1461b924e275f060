#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "netcause/quadrature.hpp"

using namespace netcause;

TEST_CASE("weights sum to sqrt(pi) and nodes are symmetric") {
    for (int q : {1, 2, 5, 10, 20, 30, 64}) {
        GaussHermite gh = GaussHermite::rule(q);
        CHECK(gh.points() == q);
        CHECK(gh.weights.sum() == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
        for (int k = 0; k < q; ++k) {
            CHECK(gh.weights(k) > 0.0);
            CHECK(gh.nodes(k) == doctest::Approx(-gh.nodes(q - 1 - k)).epsilon(1e-10));
        }
    }
}

TEST_CASE("integrates polynomials against exp(-x^2) exactly up to degree 2q-1") {
    // int x^2 e^{-x^2} = sqrt(pi)/2, int x^4 e^{-x^2} = 3 sqrt(pi)/4
    GaussHermite gh = GaussHermite::rule(5);
    double m2 = 0.0, m4 = 0.0, m8 = 0.0;
    for (int k = 0; k < gh.points(); ++k) {
        double x = gh.nodes(k), w = gh.weights(k);
        m2 += w * x * x;
        m4 += w * x * x * x * x;
        m8 += w * std::pow(x, 8);
    }
    CHECK(m2 == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-12));
    CHECK(m4 == doctest::Approx(3 * std::sqrt(M_PI) / 4).epsilon(1e-12));
    // degree 8 <= 2*5-1 = 9, still exact: 105/16 sqrt(pi)
    CHECK(m8 == doctest::Approx(105.0 / 16.0 * std::sqrt(M_PI)).epsilon(1e-12));
}

TEST_CASE("gaussian moments through the substitution used for random intercepts") {
    // E[g(b)] with b ~ N(0, phi): (1/sqrt(pi)) sum w_k g(sqrt(2 phi) x_k)
    double phi = 2.7;
    GaussHermite gh = GaussHermite::rule(12);
    double ev = 0.0, ev2 = 0.0;
    for (int k = 0; k < gh.points(); ++k) {
        double b = std::sqrt(2.0 * phi) * gh.nodes(k);
        ev += gh.weights(k) * b;
        ev2 += gh.weights(k) * b * b;
    }
    ev /= std::sqrt(M_PI);
    ev2 /= std::sqrt(M_PI);
    CHECK(ev == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ev2 == doctest::Approx(phi).epsilon(1e-12));
}

TEST_CASE("invalid point counts are rejected") {
    CHECK_THROWS(GaussHermite::rule(0));
    CHECK_THROWS(GaussHermite::rule(-3));
}
