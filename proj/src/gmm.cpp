#include "qkdrisk/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qkdrisk/errors.hpp"
#include "qkdrisk/rng.hpp"

namespace qkdrisk {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kVarianceFloor = 1e-10;
constexpr double kLogLikTol = 1e-8;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_normal_pdf(double x, double mean, double var) {
    double d = x - mean;
    return -0.5 * (std::log(kTwoPi * var) + d * d / var);
}

double log_sum_exp(const std::vector<double>& terms) {
    double m = kNegInf;
    for (double t : terms) m = std::max(m, t);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double t : terms) s += std::exp(t - m);
    return m + std::log(s);
}

// k-means++-style seeding: first mean uniform from the data, later means
// drawn with probability proportional to squared distance from the chosen set.
std::vector<double> seed_means(std::span<const double> data, int c, Rng& rng) {
    std::vector<double> means;
    means.reserve(c);
    const std::size_t n = data.size();
    means.push_back(data[static_cast<std::size_t>(rng.u01() * static_cast<double>(n)) % n]);

    std::vector<double> d2(n);
    for (int k = 1; k < c; ++k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (double m : means) {
                double d = data[i] - m;
                best = std::min(best, d * d);
            }
            d2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            // all remaining points coincide with a chosen mean
            means.push_back(means.back());
            continue;
        }
        double target = rng.u01() * total;
        std::size_t pick = n - 1;
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += d2[i];
            if (acc >= target) {
                pick = i;
                break;
            }
        }
        means.push_back(data[pick]);
    }
    return means;
}

GmmModel initial_model(std::span<const double> data, int c, std::uint64_t seed) {
    Rng rng(seed);
    GmmModel m;
    m.means = seed_means(data, c, rng);
    m.weights.assign(c, 1.0 / static_cast<double>(c));

    double mean = std::accumulate(data.begin(), data.end(), 0.0) / static_cast<double>(data.size());
    double var = 0.0;
    for (double x : data) var += (x - mean) * (x - mean);
    var = std::max(var / static_cast<double>(data.size()), kVarianceFloor);
    m.variances.assign(c, var);
    return m;
}

EmFit run_em(std::span<const double> data, const GmmModel& init, int max_iter) {
    const std::size_t n = data.size();
    const int c = init.component_count();

    GmmModel model = init;
    for (double& v : model.variances) v = std::max(v, kVarianceFloor);

    EmTrace trace;
    std::vector<std::vector<double>> resp(c, std::vector<double>(n));
    std::vector<double> log_w(c);
    std::vector<double> comp(c);
    double prev_ll = kNegInf;

    for (int iter = 0; iter < max_iter; ++iter) {
        for (int k = 0; k < c; ++k)
            log_w[k] = model.weights[k] > 0.0 ? std::log(model.weights[k]) : kNegInf;

        // E-step; accumulates the current-parameter log-likelihood
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (int k = 0; k < c; ++k) {
                comp[k] = log_w[k] == kNegInf
                              ? kNegInf
                              : log_w[k] + log_normal_pdf(data[i], model.means[k], model.variances[k]);
            }
            double denom = log_sum_exp(comp);
            ll += denom;
            for (int k = 0; k < c; ++k)
                resp[k][i] = comp[k] == kNegInf ? 0.0 : std::exp(comp[k] - denom);
        }
        trace.log_likelihoods.push_back(ll);
        trace.iterations_run = iter + 1;
        if (iter > 0 && ll - prev_ll < kLogLikTol) {
            trace.converged = true;
            break;
        }
        prev_ll = ll;

        // M-step
        for (int k = 0; k < c; ++k) {
            double rk = std::accumulate(resp[k].begin(), resp[k].end(), 0.0);
            model.weights[k] = rk / static_cast<double>(n);
            if (rk <= 0.0) continue;  // dead component keeps its parameters
            double mu = 0.0;
            for (std::size_t i = 0; i < n; ++i) mu += resp[k][i] * data[i];
            mu /= rk;
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double d = data[i] - mu;
                var += resp[k][i] * d * d;
            }
            model.means[k] = mu;
            model.variances[k] = std::max(var / rk, kVarianceFloor);
        }
    }
    return {std::move(model), std::move(trace)};
}

}  // namespace

void GmmModel::validate() const {
    const std::size_t c = weights.size();
    if (c < 1 || means.size() != c || variances.size() != c)
        throw DataError("gmm: component lists empty or of unequal length");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw DataError("gmm: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DataError("gmm: weights sum to " + std::to_string(sum));
    for (double v : variances)
        if (!(v > 0.0)) throw DataError("gmm: non-positive variance");
}

nlohmann::json GmmModel::to_json() const {
    return nlohmann::json{{"weights", weights}, {"means", means}, {"variances", variances}};
}

GmmModel GmmModel::from_json(const nlohmann::json& j) {
    GmmModel m;
    m.weights = j.at("weights").get<std::vector<double>>();
    m.means = j.at("means").get<std::vector<double>>();
    m.variances = j.at("variances").get<std::vector<double>>();
    m.validate();
    return m;
}

double gmm_pdf(const GmmModel& model, double x) {
    double p = 0.0;
    for (int k = 0; k < model.component_count(); ++k) {
        if (model.weights[k] <= 0.0) continue;
        p += model.weights[k] * std::exp(log_normal_pdf(x, model.means[k], model.variances[k]));
    }
    return p;
}

double gmm_log_pdf(const GmmModel& model, double x) {
    std::vector<double> comp(model.component_count());
    for (int k = 0; k < model.component_count(); ++k) {
        comp[k] = model.weights[k] > 0.0
                      ? std::log(model.weights[k]) +
                            log_normal_pdf(x, model.means[k], model.variances[k])
                      : kNegInf;
    }
    return log_sum_exp(comp);
}

double gmm_tail(const GmmModel& model, double t) {
    double p = 0.0;
    for (int k = 0; k < model.component_count(); ++k) {
        double z = (t - model.means[k]) / std::sqrt(model.variances[k]);
        p += model.weights[k] * 0.5 * std::erfc(z / std::sqrt(2.0));
    }
    return std::clamp(p, 0.0, 1.0);
}

double gmm_loglik(const GmmModel& model, std::span<const double> data) {
    double ll = 0.0;
    for (double x : data) ll += gmm_log_pdf(model, x);
    return ll;
}

std::vector<double> gmm_sample(const GmmModel& model, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    const int c = model.component_count();
    std::vector<double> cum(c);
    double acc = 0.0;
    for (int k = 0; k < c; ++k) {
        acc += model.weights[k];
        cum[k] = acc;
    }
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double u = rng.u01() * acc;
        int k = static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
        if (k >= c) k = c - 1;
        out.push_back(rng.normal(model.means[k], std::sqrt(model.variances[k])));
    }
    return out;
}

EmFit em_fit(std::span<const double> data, int c, std::uint64_t init_seed, int max_iter) {
    if (c < 1) throw ConfigError("em_fit: component count must be >= 1");
    if (data.size() < static_cast<std::size_t>(c))
        throw DataError("em_fit: " + std::to_string(data.size()) + " samples for c=" +
                        std::to_string(c));
    for (double x : data)
        if (!std::isfinite(x)) throw DataError("em_fit: non-finite sample");
    auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    if (*lo == *hi && c > 1)
        throw DataError("em_fit: all samples identical, mixture with c>1 is degenerate");
    return run_em(data, initial_model(data, c, init_seed), max_iter);
}

EmFit em_fit(std::span<const double> data, int c, const GmmModel& init, int max_iter) {
    if (init.component_count() != c) throw ConfigError("em_fit: init model has wrong c");
    init.validate();
    if (data.size() < static_cast<std::size_t>(c))
        throw DataError("em_fit: " + std::to_string(data.size()) + " samples for c=" +
                        std::to_string(c));
    auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    if (*lo == *hi && c > 1)
        throw DataError("em_fit: all samples identical, mixture with c>1 is degenerate");
    return run_em(data, init, max_iter);
}

double aic(const GmmModel& model, std::span<const double> data) {
    if (data.empty()) throw DataError("aic: empty data");
    double p = 3.0 * model.component_count() - 1.0;
    return 2.0 * p - 2.0 * gmm_loglik(model, data);
}

}  // namespace qkdrisk
