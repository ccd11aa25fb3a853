// Independent oracles used by the tests. Everything here recomputes results
// through a different route than the library (quadrature, naive counting,
// permutation resampling) so the checks stay meaningful.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "qkdrisk/series.hpp"

namespace oracle {

// Simpson integration of f over [a, b] with an even step count.
template <typename Fn>
long double simpson(Fn&& f, long double a, long double b, int steps) {
    if (steps % 2) ++steps;
    long double h = (b - a) / steps;
    long double acc = f(a) + f(b);
    for (int i = 1; i < steps; ++i) acc += f(a + h * i) * ((i % 2) ? 4.0L : 2.0L);
    return acc * h / 3.0L;
}

inline long double std_normal_pdf(long double x) {
    return std::exp(-0.5L * x * x) / std::sqrt(2.0L * 3.14159265358979323846264338327950288L);
}

// Upper tail of the standard normal by quadrature over [z, z+42].
inline double normal_tail(double z) {
    return static_cast<double>(simpson(std_normal_pdf, z, z + 42.0L, 120000));
}

inline double normal_cdf(double z) {
    return 1.0 - normal_tail(z);
}

// E[clamp(N(m, m^2), 0, 1)]: interior part by quadrature plus the upper
// clamp mass.
inline double clamped_normal_mean(double m) {
    auto f = [m](long double x) { return x * std_normal_pdf((x - m) / m) / m; };
    double interior = static_cast<double>(simpson(f, 0.0L, 1.0L, 20000));
    return interior + normal_tail((1.0 - m) / m);
}

// Naive two-sample KS distance: evaluate both ECDFs at every pooled point
// by direct counting.
inline double ks_d_naive(std::span<const double> a, std::span<const double> b) {
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    double d = 0.0;
    for (double x : pooled) {
        double ca = 0.0, cb = 0.0;
        for (double v : a)
            if (v <= x) ++ca;
        for (double v : b)
            if (v <= x) ++cb;
        d = std::max(d, std::abs(ca / static_cast<double>(a.size()) -
                                 cb / static_cast<double>(b.size())));
    }
    return d;
}

// Monte Carlo permutation estimate of P(D >= d_obs) under label exchange.
inline double ks_p_permutation(std::span<const double> a, std::span<const double> b, double d_obs,
                               int resamples, std::uint64_t seed) {
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::sort(pooled.begin(), pooled.end());
    const std::size_t n = a.size(), total = pooled.size();

    std::vector<std::size_t> idx(total);
    for (std::size_t i = 0; i < total; ++i) idx[i] = i;
    std::mt19937_64 rng(seed);
    std::vector<bool> is_a(total);

    int hits = 0;
    for (int r = 0; r < resamples; ++r) {
        for (std::size_t i = total - 1; i > 0; --i) {
            std::size_t j = rng() % (i + 1);
            std::swap(idx[i], idx[j]);
        }
        std::fill(is_a.begin(), is_a.end(), false);
        for (std::size_t i = 0; i < n; ++i) is_a[idx[i]] = true;

        // walk the sorted pooled values with these labels
        double d = 0.0;
        std::size_t ia = 0, ib = 0, i = 0;
        while (i < total) {
            double v = pooled[i];
            while (i < total && pooled[i] == v) {
                if (is_a[i])
                    ++ia;
                else
                    ++ib;
                ++i;
            }
            d = std::max(d, std::abs(static_cast<double>(ia) / static_cast<double>(n) -
                                     static_cast<double>(ib) / static_cast<double>(total - n)));
        }
        if (d >= d_obs - 1e-12) ++hits;
    }
    return static_cast<double>(hits) / resamples;
}

// QberSeries from raw values, unit-spaced timestamps.
inline qkdrisk::QberSeries make_series(const std::vector<double>& values,
                                       const std::string& tag = "test") {
    qkdrisk::QberSeries s;
    s.channel_tag = tag;
    s.samples.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        qkdrisk::QberSample q;
        q.timestamp = static_cast<std::int64_t>(i);
        q.qber = values[i];
        s.samples.push_back(q);
    }
    return s;
}

}  // namespace oracle
