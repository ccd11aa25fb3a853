#pragma once

#include <cstddef>
#include <span>

namespace qkdrisk {

struct KsResult {
    double d_statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    std::size_t m = 0;
};

// Two-sample Kolmogorov-Smirnov statistic: sup over x of
// |ECDF_a(x) - ECDF_b(x)|, with both step functions advanced through all
// ties at each pooled point before comparing.
double ks_statistic(std::span<const double> a, std::span<const double> b);

// Kolmogorov limit law with effective size n_e = nm/(n+m) and the
// small-sample correction lambda = (sqrt(n_e) + 0.12 + 0.11/sqrt(n_e)) d.
// The alternating series truncates when a term falls below 1e-12; the
// result is clamped to [0, 1] (at d = 0 the series diverges and clamps to 1).
double ks_pvalue_asymptotic(double d, std::size_t n, std::size_t m);

// Exact permutation P-value over all C(n+m, n) label assignments of the
// pooled sample, counting assignments with D >= d (1e-12 slack).
// Requires n + m <= 16.
double ks_pvalue_exact_small(double d, std::span<const double> a, std::span<const double> b);

// Statistic plus asymptotic P-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

}  // namespace qkdrisk
