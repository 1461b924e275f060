#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "netcause/optimize.hpp"

using namespace netcause;

TEST_CASE("quadratic bowl") {
    auto f = [](const Eigen::VectorXd& x) {
        return (x(0) - 1.5) * (x(0) - 1.5) + 3.0 * (x(1) + 0.5) * (x(1) + 0.5);
    };
    OptimResult r = minimize(f, Eigen::VectorXd::Zero(2));
    CHECK(r.converged);
    CHECK(r.x(0) == doctest::Approx(1.5).epsilon(1e-5));
    CHECK(r.x(1) == doctest::Approx(-0.5).epsilon(1e-5));
}

TEST_CASE("rosenbrock in 2d") {
    auto f = [](const Eigen::VectorXd& x) {
        double a = 1.0 - x(0), b = x(1) - x(0) * x(0);
        return a * a + 100.0 * b * b;
    };
    Eigen::VectorXd x0(2);
    x0 << -1.2, 1.0;
    OptimOptions opts;
    opts.max_iter = 2000;
    OptimResult r = minimize(f, x0, opts);
    CHECK(r.fval < 1e-8);
}

TEST_CASE("numeric gradient matches analytic") {
    auto f = [](const Eigen::VectorXd& x) {
        return std::sin(x(0)) + x(0) * x(1) + 0.5 * x(1) * x(1);
    };
    Eigen::VectorXd x(2);
    x << 0.3, -1.1;
    Eigen::VectorXd g = numeric_gradient(f, x);
    CHECK(g(0) == doctest::Approx(std::cos(0.3) - 1.1).epsilon(1e-7));
    CHECK(g(1) == doctest::Approx(0.3 - 1.1).epsilon(1e-7));
}

TEST_CASE("nelder-mead alone finds a non-smooth minimum") {
    auto f = [](const Eigen::VectorXd& x) { return std::abs(x(0) - 2.0) + std::abs(x(1)); };
    OptimResult r = nelder_mead(f, Eigen::VectorXd::Zero(2), {1e-10, 2000, 0.5});
    CHECK(r.x(0) == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(std::abs(r.x(1)) < 1e-4);
}
