#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qkdrisk/errors.hpp"
#include "qkdrisk/ks.hpp"

using namespace qkdrisk;

TEST_CASE("ks_statistic: identical samples give zero") {
    std::vector<double> a{0.3, 0.1, 0.2, 0.2};
    CHECK(ks_statistic(a, a) == 0.0);
}

TEST_CASE("ks_statistic: disjoint supports give one") {
    std::vector<double> a{0.0};
    std::vector<double> b{1.0};
    CHECK(ks_statistic(a, b) == 1.0);
}

TEST_CASE("ks_statistic: interleaved quartets") {
    std::vector<double> a{1, 2, 3, 4};
    std::vector<double> b{1.5, 2.5, 3.5, 4.5};
    CHECK(ks_statistic(a, b) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("ks_statistic: ties advance both step functions") {
    std::vector<double> a{1, 1, 2};
    std::vector<double> b{1, 2, 2};
    // at 1: |2/3 - 1/3| = 1/3, at 2: |1 - 1| = 0
    CHECK(ks_statistic(a, b) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("ks_statistic matches the naive-counting oracle") {
    std::mt19937_64 rng(101);
    for (int rep = 0; rep < 300; ++rep) {
        std::size_t n = 1 + rng() % 30, m = 1 + rng() % 30;
        std::vector<double> a(n), b(m);
        // coarse rounding forces ties
        for (auto& x : a) x = std::floor((rng() % 1000) / 100.0);
        for (auto& x : b) x = std::floor((rng() % 1000) / 100.0);
        CHECK(ks_statistic(a, b) == oracle::ks_d_naive(a, b));
    }
}

TEST_CASE("ks_statistic: symmetry and monotone-transform invariance") {
    std::mt19937_64 rng(55);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> a(20), b(25);
        for (auto& x : a) x = (rng() % 10000) / 10000.0;
        for (auto& x : b) x = (rng() % 10000) / 10000.0;
        double d = ks_statistic(a, b);
        CHECK(d == ks_statistic(b, a));

        auto ta = a, tb = b;
        for (auto& x : ta) x = std::exp(3.0 * x) - 1.0;
        for (auto& x : tb) x = std::exp(3.0 * x) - 1.0;
        CHECK(ks_statistic(ta, tb) == doctest::Approx(d).epsilon(1e-12));
    }
}

TEST_CASE("ks_statistic rejects empty samples") {
    std::vector<double> a{0.1}, empty;
    CHECK_THROWS_AS(ks_statistic(a, empty), DataError);
}

TEST_CASE("asymptotic p-value: endpoints") {
    CHECK(ks_pvalue_asymptotic(0.0, 100, 100) == 1.0);
    CHECK(ks_pvalue_asymptotic(1.0, 100, 100) < 1e-12);
}

TEST_CASE("asymptotic p-value: non-increasing in d") {
    double prev = 1.0;
    for (double d = 0.0; d <= 1.0; d += 0.01) {
        double p = ks_pvalue_asymptotic(d, 200, 150);
        CHECK(p <= prev + 1e-15);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        prev = p;
    }
}

TEST_CASE("asymptotic p-value tracks the permutation oracle at n=m=200") {
    std::mt19937_64 rng(77);
    std::vector<double> a(200), b(200);
    for (auto& x : a) x = (rng() % 100000) / 100000.0;
    for (auto& x : b) x = 0.05 + 0.9 * ((rng() % 100000) / 100000.0);
    double d = ks_statistic(a, b);
    double p_asym = ks_pvalue_asymptotic(d, 200, 200);
    double p_perm = oracle::ks_p_permutation(a, b, d, 20000, 123);
    CHECK(std::abs(p_asym - p_perm) < 0.02);
}

TEST_CASE("exact small-sample p-value: identical samples") {
    std::vector<double> a{0.1, 0.2, 0.3};
    double d = ks_statistic(a, a);
    CHECK(ks_pvalue_exact_small(d, a, a) == 1.0);
}

TEST_CASE("exact small-sample p-value: full separation of 4+4") {
    std::vector<double> a{0, 0, 0, 0}, b{1, 1, 1, 1};
    double d = ks_statistic(a, b);
    CHECK(d == 1.0);
    CHECK(ks_pvalue_exact_small(d, a, b) == doctest::Approx(1.0 / 70.0).epsilon(1e-15));
}

TEST_CASE("exact small-sample p-value: size guard") {
    std::vector<double> a(9, 0.1), b(8, 0.2);
    CHECK_THROWS_AS(ks_pvalue_exact_small(0.5, a, b), ConfigError);
}

TEST_CASE("exact vs asymptotic: bounded gap and ranking agreement") {
    std::mt19937_64 rng(31);
    int comparisons = 0, agree = 0;
    for (int rep = 0; rep < 120; ++rep) {
        std::vector<double> a(8), b1(8), b2(8);
        for (auto& x : a) x = (rng() % 1000) / 1000.0;
        for (auto& x : b1) x = (rng() % 1000) / 1000.0;
        for (auto& x : b2) x = 0.2 + 0.6 * ((rng() % 1000) / 1000.0);

        double d1 = ks_statistic(a, b1), d2 = ks_statistic(a, b2);
        double e1 = ks_pvalue_exact_small(d1, a, b1), e2 = ks_pvalue_exact_small(d2, a, b2);
        double s1 = ks_pvalue_asymptotic(d1, 8, 8), s2 = ks_pvalue_asymptotic(d2, 8, 8);

        CHECK(e1 >= s1 - 0.15);
        CHECK(e2 >= s2 - 0.15);

        if (e1 != e2) {
            ++comparisons;
            if ((e1 < e2) == (s1 < s2) || s1 == s2) ++agree;
        }
    }
    REQUIRE(comparisons > 50);
    CHECK(static_cast<double>(agree) / comparisons >= 0.95);
}

TEST_CASE("ks_two_sample bundles statistic and p-value") {
    std::vector<double> a{1, 2, 3, 4}, b{1.5, 2.5, 3.5, 4.5};
    auto r = ks_two_sample(a, b);
    CHECK(r.d_statistic == doctest::Approx(0.25));
    CHECK(r.n == 4);
    CHECK(r.m == 4);
    CHECK(r.p_value == ks_pvalue_asymptotic(0.25, 4, 4));
}
