#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace qkdrisk {

// One-dimensional Gaussian mixture. Weights sum to 1, variances are
// strictly positive, all three lists share length c >= 1.
struct GmmModel {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> variances;

    int component_count() const { return static_cast<int>(weights.size()); }
    void validate() const;  // throws DataError

    nlohmann::json to_json() const;
    static GmmModel from_json(const nlohmann::json& j);
};

struct EmTrace {
    std::vector<double> log_likelihoods;  // one entry per iteration, non-decreasing (1e-8 slack)
    int iterations_run = 0;
    bool converged = false;
};

struct EmFit {
    GmmModel model;
    EmTrace trace;
};

// Mixture density / log-density at x.
double gmm_pdf(const GmmModel& model, double x);
double gmm_log_pdf(const GmmModel& model, double x);

// P(X > t) via the complementary error function. The upper integration
// limit is +inf rather than 1; for QBER-scale parameters the mass above 1
// is below 1e-12, which keeps the nominal (t, 1] integral honest.
double gmm_tail(const GmmModel& model, double t);

// Log-likelihood of data under the model.
double gmm_loglik(const GmmModel& model, std::span<const double> data);

// n draws: component by weight, then a normal variate. Deterministic per seed.
std::vector<double> gmm_sample(const GmmModel& model, std::size_t n, std::uint64_t seed);

// EM fit with seeded initialization: k-means++-style mean seeding from the
// data, uniform weights, pooled variance. Stops at max_iter or when the
// log-likelihood gain drops below 1e-8. Variances are floored at 1e-10.
EmFit em_fit(std::span<const double> data, int c, std::uint64_t init_seed, int max_iter);

// EM warm-started from an explicit model.
EmFit em_fit(std::span<const double> data, int c, const GmmModel& init, int max_iter);

// Akaike information criterion: 2p - 2 logL with p = 3c - 1.
double aic(const GmmModel& model, std::span<const double> data);

}  // namespace qkdrisk
