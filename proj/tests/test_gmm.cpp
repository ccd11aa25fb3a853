#include <cmath>
#include <numeric>

#include "doctest.h"
#include "oracles.hpp"
#include "qkdrisk/errors.hpp"
#include "qkdrisk/gmm.hpp"
#include "qkdrisk/rng.hpp"

using namespace qkdrisk;

namespace {

GmmModel single(double mu, double var) {
    return GmmModel{{1.0}, {mu}, {var}};
}

std::vector<double> draw(const GmmModel& m, std::size_t n, std::uint64_t seed) {
    return gmm_sample(m, n, seed);
}

}  // namespace

TEST_CASE("pdf: standard normal peak") {
    CHECK(gmm_pdf(single(0.0, 1.0), 0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
}

TEST_CASE("pdf: symmetric two-component mixture at the midpoint") {
    GmmModel m{{0.5, 0.5}, {-1.0, 1.0}, {1.0, 1.0}};
    // sum of two analytic normal densities
    CHECK(gmm_pdf(m, 0.0) == doctest::Approx(0.2419707245191434).epsilon(1e-12));
}

TEST_CASE("pdf: quadrature normalization") {
    Rng rng(11);
    for (int rep = 0; rep < 5; ++rep) {
        int c = 1 + rep % 3;
        GmmModel m;
        double wsum = 0.0;
        for (int k = 0; k < c; ++k) {
            m.weights.push_back(rng.uniform(0.2, 1.0));
            m.means.push_back(rng.uniform(0.0, 0.1));
            m.variances.push_back(rng.uniform(1e-6, 1e-4));
            wsum += m.weights[k];
        }
        for (double& w : m.weights) w /= wsum;

        double lo = *std::min_element(m.means.begin(), m.means.end());
        double hi = *std::max_element(m.means.begin(), m.means.end());
        double smax = std::sqrt(*std::max_element(m.variances.begin(), m.variances.end()));
        auto f = [&](long double x) { return (long double)gmm_pdf(m, (double)x); };
        double mass = (double)oracle::simpson(f, lo - 10 * smax, hi + 10 * smax, 40000);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("pdf is non-negative everywhere sampled") {
    GmmModel m{{0.3, 0.7}, {0.01, 0.05}, {1e-6, 4e-6}};
    for (double x = -0.5; x <= 0.5; x += 0.001) CHECK(gmm_pdf(m, x) >= 0.0);
}

TEST_CASE("tail: boundary and symmetry values") {
    GmmModel m = single(0.02, 0.005 * 0.005);
    CHECK(gmm_tail(m, -100.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gmm_tail(m, 0.02) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gmm_tail(m, 100.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("tail: six-sigma mass against the quadrature oracle") {
    GmmModel m = single(0.02, 0.005 * 0.005);
    double got = gmm_tail(m, 0.05);  // z = 6
    double want = oracle::normal_tail(6.0);
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
    CHECK(got == doctest::Approx(9.865876450376981e-10).epsilon(1e-9));
}

TEST_CASE("tail is non-increasing in the threshold") {
    GmmModel m{{0.4, 0.6}, {0.01, 0.04}, {1e-6, 9e-6}};
    double prev = 1.0;
    for (double t = -0.1; t <= 0.2; t += 0.002) {
        double cur = gmm_tail(m, t);
        CHECK(cur <= prev + 1e-15);
        prev = cur;
    }
}

TEST_CASE("sample: law of large numbers") {
    auto xs = draw(single(0.03, 1e-6), 100000, 42);
    double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    CHECK(mean == doctest::Approx(0.03).epsilon(1e-3));
    CHECK(std::abs(mean - 0.03) < 3e-5);
}

TEST_CASE("sample: degenerate weights draw only the live component") {
    GmmModel m{{1.0, 0.0}, {0.02, 0.08}, {1e-8, 1e-8}};
    auto xs = draw(m, 2000, 5);
    for (double x : xs) CHECK(std::abs(x - 0.02) < 0.01);
}

TEST_CASE("sample: same seed gives identical sequences") {
    GmmModel m{{0.5, 0.5}, {0.01, 0.04}, {1e-6, 1e-6}};
    CHECK(draw(m, 1000, 9) == draw(m, 1000, 9));
    CHECK(draw(m, 1000, 9) != draw(m, 1000, 10));
}

TEST_CASE("em_fit: single-component generator recovery") {
    auto data = draw(single(0.02, 0.003 * 0.003), 5000, 31);
    auto fit = em_fit(data, 1, 1, 100);
    CHECK(std::abs(fit.model.means[0] - 0.02) < 2e-4);
    CHECK(std::abs(std::sqrt(fit.model.variances[0]) - 0.003) < 2e-4);
    CHECK(fit.trace.converged);
}

TEST_CASE("em_fit: two-component recovery") {
    GmmModel gen{{0.5, 0.5}, {0.01, 0.04}, {4e-6, 4e-6}};
    auto data = draw(gen, 10000, 17);
    auto fit = em_fit(data, 2, 3, 100);
    double lo = std::min(fit.model.means[0], fit.model.means[1]);
    double hi = std::max(fit.model.means[0], fit.model.means[1]);
    CHECK(std::abs(lo - 0.01) < 1e-3);
    CHECK(std::abs(hi - 0.04) < 1e-3);
}

TEST_CASE("em_fit: c=1 lands exactly on sample mean and variance") {
    auto data = draw(single(0.05, 1e-4), 777, 8);
    auto fit = em_fit(data, 1, 0, 100);
    double mean = std::accumulate(data.begin(), data.end(), 0.0) / data.size();
    double var = 0.0;
    for (double x : data) var += (x - mean) * (x - mean);
    var /= data.size();
    CHECK(fit.model.means[0] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(fit.model.variances[0] == doctest::Approx(var).epsilon(1e-10));
}

TEST_CASE("em_fit: error paths") {
    std::vector<double> tiny{0.01, 0.02};
    CHECK_THROWS_AS(em_fit(tiny, 3, 1, 50), DataError);
    std::vector<double> flat(100, 0.02);
    CHECK_THROWS_AS(em_fit(flat, 2, 1, 50), DataError);
    CHECK_NOTHROW(em_fit(flat, 1, 1, 50));
}

TEST_CASE("em_fit: log-likelihood trace is monotone") {
    Rng seeds(23);
    for (int rep = 0; rep < 25; ++rep) {
        GmmModel gen{{0.4, 0.6},
                     {seeds.uniform(0.005, 0.02), seeds.uniform(0.03, 0.06)},
                     {4e-6, 9e-6}};
        auto data = draw(gen, 600, seeds.next_u64());
        auto fit = em_fit(data, 2 + (rep % 2), seeds.next_u64(), 80);
        for (std::size_t i = 1; i < fit.trace.log_likelihoods.size(); ++i)
            CHECK(fit.trace.log_likelihoods[i] >= fit.trace.log_likelihoods[i - 1] - 1e-8);
    }
}

TEST_CASE("em_fit is deterministic") {
    GmmModel gen{{0.5, 0.5}, {0.01, 0.05}, {4e-6, 4e-6}};
    auto data = draw(gen, 800, 3);
    auto a = em_fit(data, 2, 42, 100);
    auto b = em_fit(data, 2, 42, 100);
    CHECK(a.model.means == b.model.means);
    CHECK(a.model.weights == b.model.weights);
    CHECK(a.trace.log_likelihoods == b.trace.log_likelihoods);
}

TEST_CASE("aic: parameter count and likelihood dominance") {
    auto data = draw(single(0.02, 1e-5), 2000, 4);
    auto fit = em_fit(data, 1, 1, 100);

    // p = 3c - 1 = 2 for c = 1
    double expected = 2.0 * 2.0 - 2.0 * gmm_loglik(fit.model, data);
    CHECK(aic(fit.model, data) == doctest::Approx(expected).epsilon(1e-12));

    GmmModel m3{{0.3, 0.3, 0.4}, {0.0, 0.1, 0.2}, {1e-4, 1e-4, 1e-4}};
    double expected3 = 2.0 * 8.0 - 2.0 * gmm_loglik(m3, data);  // p = 8 for c = 3
    CHECK(aic(m3, data) == doctest::Approx(expected3).epsilon(1e-12));

    GmmModel shifted = fit.model;
    shifted.means[0] += 10.0 * std::sqrt(shifted.variances[0]);
    CHECK(aic(fit.model, data) < aic(shifted, data));
}

TEST_CASE("aic prefers the matching component count on separated mixtures") {
    GmmModel gen{{0.5, 0.5}, {0.01, 0.05}, {4e-6, 4e-6}};
    auto data = draw(gen, 4000, 12);
    auto fit1 = em_fit(data, 1, 1, 100);
    auto fit2 = em_fit(data, 2, 1, 100);
    CHECK(aic(fit2.model, data) < aic(fit1.model, data));
}

TEST_CASE("model json round-trip preserves exact values") {
    GmmModel m{{0.12345678901234567, 0.87654321098765433},
               {0.019999999999999997, 0.051234567890123456},
               {1.2345678901234567e-6, 9.876543210987654e-6}};
    auto back = GmmModel::from_json(m.to_json());
    CHECK(back.weights == m.weights);
    CHECK(back.means == m.means);
    CHECK(back.variances == m.variances);
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS((GmmModel{{}, {}, {}}).validate(), DataError);
    CHECK_THROWS_AS((GmmModel{{0.5, 0.4}, {0.0, 1.0}, {1.0, 1.0}}).validate(), DataError);
    CHECK_THROWS_AS((GmmModel{{1.0}, {0.0}, {0.0}}).validate(), DataError);
    CHECK_NOTHROW((GmmModel{{1.0}, {0.0}, {1.0}}).validate());
}
