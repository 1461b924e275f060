#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "netcause/allocation.hpp"
#include "oracles.hpp"

using namespace netcause;

TEST_CASE("pi_neighborhood basics") {
    CHECK(pi_neighborhood(0, 0, 0.3) == 1.0);  // empty product
    CHECK(pi_neighborhood(1, 2, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
    // brute-force enumeration over all 2^10 assignment vectors
    double want = oracles::binomial_pmf_enumerated(3, 10, 0.3);
    CHECK(pi_neighborhood(3, 10, 0.3) == doctest::Approx(want).epsilon(1e-12));
    // independent log-gamma oracle
    CHECK(pi_neighborhood(3, 10, 0.3) ==
          doctest::Approx(oracles::binomial_pmf_lgamma(3, 10, 0.3)).epsilon(1e-12));
}

TEST_CASE("pi_neighborhood domain errors") {
    CHECK_THROWS_AS(pi_neighborhood(3, 2, 0.5), std::domain_error);
    CHECK_THROWS_AS(pi_neighborhood(-1, 2, 0.5), std::domain_error);
    CHECK_THROWS_AS(pi_neighborhood(0, 2, 1.5), std::domain_error);
    CHECK_THROWS_AS(pi_joint(2, 0, 2, 0.5), std::domain_error);
}

TEST_CASE("pi_joint basics") {
    CHECK(pi_joint(1, 0, 0, 0.7) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(pi_joint(0, 1, 1, 0.5) == doctest::Approx(0.25).epsilon(1e-15));
    double total = 0.0;
    for (int z = 0; z <= 1; ++z)
        for (int s = 0; s <= 6; ++s) total += pi_joint(z, s, 6, 0.42);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalization over a 101-point alpha grid up to d = 64") {
    for (int d = 0; d <= 64; ++d) {
        for (int k = 0; k <= 100; ++k) {
            double alpha = k / 100.0;
            double total = 0.0;
            for (int s = 0; s <= d; ++s) total += pi_neighborhood(s, d, alpha);
            CHECK(std::abs(total - 1.0) < 1e-12);
            double joint = 0.0;
            for (int z = 0; z <= 1; ++z)
                for (int s = 0; s <= d; ++s) joint += pi_joint(z, s, d, alpha);
            CHECK(std::abs(joint - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("symmetry and endpoints") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        int d = static_cast<int>(rng() % 40);
        int s = d == 0 ? 0 : static_cast<int>(rng() % (d + 1));
        double alpha = unif(rng);
        CHECK(pi_neighborhood(s, d, alpha) ==
              doctest::Approx(pi_neighborhood(d - s, d, 1.0 - alpha)).epsilon(1e-12));
    }
    for (int d : {0, 1, 5, 33}) {
        CHECK(pi_neighborhood(0, d, 0.0) == 1.0);
        CHECK(pi_neighborhood(d, d, 1.0) == 1.0);
        for (int s = 1; s <= d; ++s) CHECK(pi_neighborhood(s, d, 0.0) == 0.0);
        for (int s = 0; s < d; ++s) CHECK(pi_neighborhood(s, d, 1.0) == 0.0);
    }
}

TEST_CASE("treatment profile equals pmf over the binomial coefficient") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.01, 0.99);
    for (int trial = 0; trial < 100; ++trial) {
        int d = 1 + static_cast<int>(rng() % 30);
        int s = static_cast<int>(rng() % (d + 1));
        double alpha = unif(rng);
        double want = pi_neighborhood(s, d, alpha) / std::exp(log_choose(d, s));
        CHECK(treatment_profile(s, d, alpha) == doctest::Approx(want).epsilon(1e-12));
    }
    CHECK(treatment_profile(0, 4, 0.0) == 1.0);
    CHECK(treatment_profile(1, 4, 0.0) == 0.0);
    CHECK(treatment_profile(4, 4, 1.0) == 1.0);
}
